// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#include "fader/bench/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fader/bench/scenario.hpp"
#include "yaml_util.hpp"

namespace fader::bench {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_u64(std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("bad seed '" + std::string(s) + "'");
    return v;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ConditionId condition_from_name(const std::string& name) {
    if (name == "initial") return ConditionId::initial();
    if (name == "final") return ConditionId::final();
    if (name == "neutral") return ConditionId::neutral();
    if (name == "null") return ConditionId::null();
    return ConditionId::custom(name);
}

template <typename F>
auto wrap(const YAML::Node& node, const std::string& field, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), yaml::line(node), field);
    }
}

}  // namespace

void RunConfig::validate() const {
    if (seeds.empty()) throw ConfigError("seed list is empty");
    if (modes.empty()) throw ConfigError("mode list is empty");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (!(sampler.eta >= 0.0 && sampler.eta <= 1.0)) throw ConfigError("sampler eta must lie in [0, 1]");
    // Constructs and checks the schedule.
    try {
        (void)build_schedule(schedule);
    } catch (const InvalidScheduleParams& e) {
        throw ConfigError(e.what());
    }
    if (guidance.tau < 0 || guidance.tau > schedule.steps) throw ConfigError("tau must lie in [0, T]");
    if (!(guidance.omega >= 0)) throw ConfigError("omega must be >= 0");
    if (!(guidance.alpha_max >= 0)) throw ConfigError("alpha_max must be >= 0");
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
    const YAML::Node root = yaml::load(text, source);
    yaml::require_map(root, "document");
    yaml::reject_unknown(root,
                         {"schema_version", "schedule", "guidance", "sampler", "modes", "seeds", "master_seed",
                          "scenarios", "output", "threads"},
                         "document");
    yaml::check_schema_version(root, kSchemaVersion);

    RunConfig cfg;
    if (const auto s = root["schedule"]) {
        yaml::require_map(s, "schedule");
        yaml::reject_unknown(s, {"steps", "beta_start", "beta_end", "kind"}, "schedule");
        if (s["steps"]) cfg.schedule = ScheduleParams::defaults(yaml::as<Index>(s["steps"], "schedule.steps"));
        if (s["beta_start"]) cfg.schedule.beta_start = yaml::as<double>(s["beta_start"], "schedule.beta_start");
        if (s["beta_end"]) cfg.schedule.beta_end = yaml::as<double>(s["beta_end"], "schedule.beta_end");
        if (s["kind"]) {
            const auto k = yaml::as<std::string>(s["kind"], "schedule.kind");
            if (k == "linear") cfg.schedule.kind = ScheduleKind::linear;
            else if (k == "scaled_linear") cfg.schedule.kind = ScheduleKind::scaled_linear;
            else throw ParseError("unknown schedule kind '" + k + "'", yaml::line(s["kind"]), "schedule.kind");
        }
    }
    if (const auto g = root["guidance"]) {
        yaml::require_map(g, "guidance");
        yaml::reject_unknown(g,
                             {"omega", "tau", "alpha_max", "middle_frame", "normalization", "direction_policy",
                              "single_condition"},
                             "guidance");
        auto& spec = cfg.guidance;
        if (g["omega"]) spec.omega = yaml::as<double>(g["omega"], "guidance.omega");
        if (g["tau"]) spec.tau = yaml::as<Index>(g["tau"], "guidance.tau");
        if (g["alpha_max"]) spec.alpha_max = yaml::as<double>(g["alpha_max"], "guidance.alpha_max");
        if (g["middle_frame"] && !(g["middle_frame"].IsScalar() && g["middle_frame"].Scalar() == "auto"))
            spec.middle_frame = yaml::as<Index>(g["middle_frame"], "guidance.middle_frame");
        if (g["normalization"])
            spec.normalization = wrap(g["normalization"], "guidance.normalization", [&] {
                return parse_direction_norm(yaml::as<std::string>(g["normalization"], "guidance.normalization"));
            });
        if (g["direction_policy"])
            spec.direction_policy = wrap(g["direction_policy"], "guidance.direction_policy", [&] {
                return parse_direction_policy(yaml::as<std::string>(g["direction_policy"], "guidance.direction_policy"));
            });
        if (g["single_condition"])
            spec.single_condition =
                condition_from_name(yaml::as<std::string>(g["single_condition"], "guidance.single_condition"));
    }
    if (const auto s = root["sampler"]) {
        yaml::require_map(s, "sampler");
        yaml::reject_unknown(s, {"kind", "eta"}, "sampler");
        if (s["kind"])
            cfg.sampler.type = wrap(s["kind"], "sampler.kind",
                                    [&] { return parse_sampler_type(yaml::as<std::string>(s["kind"], "sampler.kind")); });
        cfg.sampler.eta = cfg.sampler.type == SamplerKind::Type::ddpm_ancestral ? 1.0 : 0.0;
        if (s["eta"]) cfg.sampler.eta = yaml::as<double>(s["eta"], "sampler.eta");
    }
    if (const auto m = root["modes"]) {
        cfg.modes.clear();
        if (m.IsScalar()) {
            cfg.modes = wrap(m, "modes", [&] { return parse_mode_list(m.Scalar()); });
        } else {
            for (const auto& e : m)
                cfg.modes.push_back(wrap(e, "modes", [&] { return parse_guidance_mode(yaml::as<std::string>(e, "modes")); }));
        }
    }
    if (const auto s = root["seeds"]) {
        cfg.seeds.clear();
        if (s.IsScalar()) {
            cfg.seeds = wrap(s, "seeds", [&] { return parse_seed_list(s.Scalar()); });
        } else {
            for (const auto& e : s) cfg.seeds.push_back(yaml::as<std::uint64_t>(e, "seeds"));
        }
    }
    if (root["master_seed"]) cfg.master_seed = yaml::as<std::uint64_t>(root["master_seed"], "master_seed");
    if (const auto s = root["scenarios"])
        for (const auto& e : s) cfg.scenario_ids.push_back(yaml::as<std::string>(e, "scenarios"));
    if (root["output"]) cfg.output_dir = yaml::as<std::string>(root["output"], "output");
    if (root["threads"]) cfg.threads = yaml::as<unsigned>(root["threads"], "threads");

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ValidationError(std::string(source) + ": " + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.string());
}

std::string config_hash(const RunConfig& cfg) {
    const auto& g = cfg.guidance;
    std::string canon;
    canon += "steps=" + std::to_string(cfg.schedule.steps);
    canon += ";beta_start=" + fmt_double(cfg.schedule.beta_start);
    canon += ";beta_end=" + fmt_double(cfg.schedule.beta_end);
    canon += ";schedule=" + std::string(to_string(cfg.schedule.kind));
    canon += ";omega=" + fmt_double(g.omega);
    canon += ";tau=" + std::to_string(g.tau);
    canon += ";alpha_max=" + fmt_double(g.alpha_max);
    canon += ";middle=" + (g.middle_frame ? std::to_string(*g.middle_frame) : std::string("auto"));
    canon += ";norm=" + std::string(to_string(g.normalization));
    canon += ";policy=" + std::string(to_string(g.direction_policy));
    canon += ";single=" + g.single_condition.str();
    canon += ";sampler=" + std::string(to_string(cfg.sampler.type));
    canon += ";eta=" + fmt_double(cfg.sampler.eta);
    canon += ";master_seed=" + std::to_string(cfg.master_seed);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canon)));
    return buf;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto item = trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (!item.empty()) {
            const auto dash = item.find('-');
            if (dash == std::string::npos) {
                out.push_back(parse_u64(item));
            } else {
                const auto lo = parse_u64(trim(std::string_view(item).substr(0, dash)));
                const auto hi = parse_u64(trim(std::string_view(item).substr(dash + 1)));
                if (hi < lo) throw ConfigError("bad seed range '" + item + "'");
                for (auto s = lo; s <= hi; ++s) out.push_back(s);
            }
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("seed list is empty");
    return out;
}

std::vector<GuidanceMode> parse_mode_list(std::string_view text) {
    std::vector<GuidanceMode> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        const auto item = trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (!item.empty()) out.push_back(parse_guidance_mode(item));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("mode list is empty");
    return out;
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::string_view scenario_id, std::uint64_t seed) {
    return Rng::split(Rng::split(master_seed, fnv1a64(scenario_id)), seed);
}

}  // namespace fader::bench
