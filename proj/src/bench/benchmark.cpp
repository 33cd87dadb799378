// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#include "fader/bench/benchmark.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <thread>

#include <json.hpp>

namespace fader::bench {
namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += (c == '\n' || c == '\r') ? ' ' : c;
    }
    return out + "\"";
}

// Per-scenario objects shared read-only by every cell of that scenario.
struct Prepared {
    const ScenarioSpec* spec = nullptr;
    std::optional<AnalyticDenoiser<double>> denoiser;
    std::optional<ToyLinearEmbedder<double>> embedder;
    std::string error;
};

CellResult run_cell(const RunConfig& cfg, const NoiseScheduled& sched, const Prepared& p, GuidanceMode mode,
                    std::uint64_t seed) {
    CellResult r;
    r.scenario = p.spec->id;
    r.category = p.spec->category;
    r.mode = mode;
    r.seed = seed;
    if (!p.error.empty()) {
        r.error = p.error;
        return r;
    }
    try {
        GuidanceSpec spec = cfg.guidance;
        spec.mode = mode;
        Rng rng(cell_seed(cfg.master_seed, p.spec->id, seed));
        const auto traj = sample_video(spec, cfg.sampler, ConditionSet{}, p.spec->frames, *p.denoiser, sched, rng);
        const auto& z0 = traj.final_sample();
        const auto rep = transition_report(z0, ConditionId::initial(), ConditionId::final(), *p.embedder, r.scenario, seed);
        r.wholistic = rep.wholistic;
        r.framewise = rep.framewise;
        r.static_pair_count = rep.static_pair_count;
        const auto attr = attribute_profile(z0, ConditionId::initial(), ConditionId::final(), *p.embedder);
        r.last_attribute = attr(attr.size() - 1);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

struct Moments {
    double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
        m.var /= static_cast<double>(xs.size() - 1);
    }
    return m;
}

}  // namespace

bool BenchReport::any_failed() const {
    for (const auto& r : rows)
        if (!r.ok()) return true;
    return false;
}

BenchReport run_benchmark(const RunConfig& cfg, const std::vector<ScenarioSpec>& scenarios) {
    cfg.validate();
    const auto sched = build_schedule(cfg.schedule);

    std::vector<const ScenarioSpec*> chosen;
    if (cfg.scenario_ids.empty()) {
        for (const auto& s : scenarios) chosen.push_back(&s);
    } else {
        for (const auto& id : cfg.scenario_ids) chosen.push_back(&find_scenario(scenarios, id));
    }

    std::vector<Prepared> prepared(chosen.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        prepared[i].spec = chosen[i];
        try {
            prepared[i].denoiser.emplace(make_denoiser(*chosen[i], sched));
            prepared[i].embedder.emplace(make_embedder(*chosen[i]));
        } catch (const std::exception& e) {
            prepared[i].error = e.what();
        }
    }

    struct Cell {
        std::size_t scenario;
        GuidanceMode mode;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (std::size_t s = 0; s < prepared.size(); ++s)
        for (auto mode : cfg.modes)
            for (auto seed : cfg.seeds) cells.push_back({s, mode, seed});

    BenchReport report;
    report.config_hash = config_hash(cfg);
    report.rows.resize(cells.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++)
            report.rows[i] = run_cell(cfg, sched, prepared[cells[i].scenario], cells[i].mode, cells[i].seed);
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cells.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }

    report.by_scenario = aggregate_rows(report.rows, false);
    report.by_category = aggregate_rows(report.rows, true);
    return report;
}

std::vector<Aggregate> aggregate_rows(const std::vector<CellResult>& rows, bool by_category) {
    struct Acc {
        std::vector<double> wholistic, framewise, last;
        std::size_t failed = 0;
    };
    std::vector<std::pair<std::string, GuidanceMode>> order;
    std::map<std::pair<std::string, GuidanceMode>, Acc> acc;
    for (const auto& r : rows) {
        const std::pair key{by_category ? std::string(to_string(r.category)) : r.scenario, r.mode};
        auto [it, inserted] = acc.try_emplace(key);
        if (inserted) order.push_back(key);
        if (!r.ok()) {
            ++it->second.failed;
            continue;
        }
        it->second.wholistic.push_back(r.wholistic);
        it->second.framewise.push_back(r.framewise);
        it->second.last.push_back(r.last_attribute);
    }

    std::vector<Aggregate> out;
    for (const auto& key : order) {
        const auto& a = acc.at(key);
        Aggregate g;
        g.group = key.first;
        g.mode = key.second;
        g.n_ok = a.wholistic.size();
        g.n_failed = a.failed;
        const auto w = moments(a.wholistic), f = moments(a.framewise), l = moments(a.last);
        g.mean_wholistic = w.mean;
        g.std_wholistic = std::sqrt(w.var);
        g.mean_framewise = f.mean;
        g.std_framewise = std::sqrt(f.var);
        g.mean_last_attribute = l.mean;
        g.var_last_attribute = l.var;
        for (double x : a.last) g.mean_abs_last_attribute += std::abs(x);
        if (!a.last.empty()) g.mean_abs_last_attribute /= static_cast<double>(a.last.size());
        out.push_back(g);
    }
    return out;
}

std::string report_csv(const BenchReport& report, std::string_view timestamp) {
    std::string out = "# fader report generated " + std::string(timestamp) + "\n";
    out += kReportColumns;
    out += '\n';
    for (const auto& r : report.rows) {
        out += csv_field(r.scenario) + ',' + std::string(to_string(r.category)) + ',' + std::string(to_string(r.mode)) +
               ',' + std::to_string(r.seed) + ',';
        if (r.ok()) {
            out += num(r.wholistic) + ',' + num(r.framewise) + ',' + std::to_string(r.static_pair_count) + ",,";
        } else {
            out += ",,," + csv_field(r.error) + ',';
        }
        out += report.config_hash + '\n';
    }
    return out;
}

std::string report_json(const BenchReport& report, const RunConfig& cfg, std::string_view timestamp) {
    using nlohmann::ordered_json;
    auto agg_json = [](const std::vector<Aggregate>& aggs, const char* key) {
        ordered_json arr = ordered_json::array();
        for (const auto& a : aggs) {
            arr.push_back({{key, a.group},
                           {"mode", to_string(a.mode)},
                           {"n_ok", a.n_ok},
                           {"n_failed", a.n_failed},
                           {"mean_wholistic", a.mean_wholistic},
                           {"std_wholistic", a.std_wholistic},
                           {"mean_framewise", a.mean_framewise},
                           {"std_framewise", a.std_framewise},
                           {"mean_last_attribute", a.mean_last_attribute},
                           {"mean_abs_last_attribute", a.mean_abs_last_attribute},
                           {"var_last_attribute", a.var_last_attribute}});
        }
        return arr;
    };

    ordered_json rows = ordered_json::array();
    for (const auto& r : report.rows) {
        ordered_json row{{"scenario", r.scenario},
                         {"category", to_string(r.category)},
                         {"mode", to_string(r.mode)},
                         {"seed", r.seed}};
        if (r.ok()) {
            row["wholistic"] = r.wholistic;
            row["framewise"] = r.framewise;
            row["static_pair_count"] = r.static_pair_count;
            row["last_attribute"] = r.last_attribute;
            row["error"] = nullptr;
        } else {
            row["error"] = r.error;
        }
        row["config_hash"] = report.config_hash;
        rows.push_back(std::move(row));
    }

    const auto& g = cfg.guidance;
    ordered_json doc{
        {"schema_version", kSchemaVersion},
        {"generated", timestamp},
        {"config_hash", report.config_hash},
        {"config",
         {{"steps", cfg.schedule.steps},
          {"beta_start", cfg.schedule.beta_start},
          {"beta_end", cfg.schedule.beta_end},
          {"schedule_kind", to_string(cfg.schedule.kind)},
          {"omega", g.omega},
          {"tau", g.tau},
          {"alpha_max", g.alpha_max},
          {"middle_frame", g.middle_frame ? ordered_json(*g.middle_frame) : ordered_json("auto")},
          {"normalization", to_string(g.normalization)},
          {"direction_policy", to_string(g.direction_policy)},
          {"single_condition", g.single_condition.str()},
          {"sampler", to_string(cfg.sampler.type)},
          {"eta", cfg.sampler.eta},
          {"master_seed", cfg.master_seed}}},
        {"rows", std::move(rows)},
        {"aggregates", {{"by_scenario", agg_json(report.by_scenario, "scenario")},
                        {"by_category", agg_json(report.by_category, "category")}}},
    };
    return doc.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

void write_report(const BenchReport& report, const RunConfig& cfg, const std::filesystem::path& dir,
                  std::string_view stem) {
    const auto ts = utc_timestamp();
    write_text(dir / (std::string(stem) + ".csv"), report_csv(report, ts));
    write_text(dir / (std::string(stem) + ".json"), report_json(report, cfg, ts));
}

std::string trajectory_csv(const Trajectory<double>& traj, const ScenarioSpec& scenario) {
    const auto& z0 = traj.final_sample();
    if (z0.dim() != scenario.dim) throw DimMismatch("trajectory dim does not match scenario");
    const auto emb = make_embedder(scenario);
    const auto attr = attribute_profile(z0, ConditionId::initial(), ConditionId::final(), emb);

    std::string out = "frame";
    for (Index i = 0; i < z0.dim(); ++i) out += ",z0_" + std::to_string(i);
    out += ",attribute\n";
    for (Index j = 0; j < z0.frames(); ++j) {
        out += std::to_string(j);
        for (Index i = 0; i < z0.dim(); ++i) out += ',' + num(z0.data()(j, i));
        out += ',' + num(attr(j)) + '\n';
    }
    return out;
}

void emit_trajectory_csv(const Trajectory<double>& traj, const ScenarioSpec& scenario,
                         const std::filesystem::path& path) {
    write_text(path, trajectory_csv(traj, scenario));
}

Trajectory<double> generate(const RunConfig& cfg, const ScenarioSpec& scenario, GuidanceMode mode,
                            std::uint64_t seed) {
    const auto sched = build_schedule(cfg.schedule);
    const auto den = make_denoiser(scenario, sched);
    GuidanceSpec spec = cfg.guidance;
    spec.mode = mode;
    Rng rng(cell_seed(cfg.master_seed, scenario.id, seed));
    auto traj = sample_video(spec, cfg.sampler, ConditionSet{}, scenario.frames, den, sched, rng);
    traj.seed = seed;
    return traj;
}

std::string_view to_string(SweepParam p) {
    switch (p) {
        case SweepParam::alpha_max: return "alpha_max";
        case SweepParam::omega: return "omega";
        case SweepParam::tau: return "tau";
    }
    return "?";
}

SweepParam parse_sweep_param(std::string_view s) {
    if (s == "alpha_max" || s == "alpha") return SweepParam::alpha_max;
    if (s == "omega") return SweepParam::omega;
    if (s == "tau") return SweepParam::tau;
    throw ConfigError("unknown sweep parameter '" + std::string(s) + "' (expected alpha_max, omega or tau)");
}

std::vector<SweepPoint> run_sweep(const RunConfig& cfg, const std::vector<ScenarioSpec>& scenarios, SweepParam param,
                                  const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<SweepPoint> out;
    for (double v : values) {
        RunConfig c = cfg;
        switch (param) {
            case SweepParam::alpha_max: c.guidance.alpha_max = v; break;
            case SweepParam::omega: c.guidance.omega = v; break;
            case SweepParam::tau:
                if (v != std::floor(v)) throw ConfigError("tau sweep values must be integers");
                c.guidance.tau = static_cast<Index>(v);
                break;
        }
        auto report = run_benchmark(c, scenarios);
        out.push_back({v, std::move(c), std::move(report)});
    }
    return out;
}

std::string sweep_csv(SweepParam param, const std::vector<SweepPoint>& points) {
    std::string out =
        "param,value,scenario,mode,n_ok,n_failed,mean_wholistic,std_wholistic,mean_framewise,std_framewise,"
        "mean_last_attribute,mean_abs_last_attribute,var_last_attribute\n";
    for (const auto& p : points) {
        for (const auto& a : p.report.by_scenario) {
            out += std::string(to_string(param)) + ',' + num(p.value) + ',' + csv_field(a.group) + ',' +
                   std::string(to_string(a.mode)) + ',' + std::to_string(a.n_ok) + ',' + std::to_string(a.n_failed) +
                   ',' + num(a.mean_wholistic) + ',' + num(a.std_wholistic) + ',' + num(a.mean_framewise) + ',' +
                   num(a.std_framewise) + ',' + num(a.mean_last_attribute) + ',' + num(a.mean_abs_last_attribute) +
                   ',' + num(a.var_last_attribute) + '\n';
        }
    }
    return out;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace fader::bench
