// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#include "fader/bench/scenario.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "yaml_util.hpp"

namespace fader::bench {
namespace {

constexpr std::array<std::pair<std::string_view, Category>, 9> kCategories{{
    {"age", Category::age},
    {"beard", Category::beard},
    {"makeup", Category::makeup},
    {"hair", Category::hair},
    {"color", Category::color},
    {"material", Category::material},
    {"light", Category::light},
    {"weather", Category::weather},
    {"custom", Category::custom},
}};

ConditionId role_from_name(const std::string& name) {
    if (name == "initial") return ConditionId::initial();
    if (name == "final") return ConditionId::final();
    if (name == "neutral") return ConditionId::neutral();
    return ConditionId::custom(name);
}

// Scalars broadcast to every coordinate; lists must have exactly `dim` entries.
Eigen::VectorXd read_vector(const YAML::Node& node, Index dim, const std::string& field) {
    if (node.IsScalar()) return Eigen::VectorXd::Constant(dim, yaml::as<double>(node, field));
    if (!node.IsSequence()) throw ParseError("expected a number or a list", yaml::line(node), field);
    if (static_cast<Index>(node.size()) != dim)
        throw ParseError("expected " + std::to_string(dim) + " entries, got " + std::to_string(node.size()),
                         yaml::line(node), field);
    Eigen::VectorXd v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = yaml::as<double>(node[static_cast<std::size_t>(i)], field);
    return v;
}

GaussianConditiond read_condition(const YAML::Node& node, Index dim, const std::string& field) {
    yaml::require_map(node, field);
    yaml::reject_unknown(node, {"mean", "var"}, field);
    return {read_vector(yaml::required(node, "mean", field), dim, field + ".mean"),
            read_vector(yaml::required(node, "var", field), dim, field + ".var")};
}

ScenarioSpec read_scenario(const YAML::Node& node, std::size_t index) {
    const std::string where = "scenarios[" + std::to_string(index) + "]";
    yaml::require_map(node, where);
    yaml::reject_unknown(node, {"id", "category", "frames", "dim", "notes", "conditions", "null", "embedder"}, where);

    ScenarioSpec s;
    s.id = yaml::as<std::string>(yaml::required(node, "id", where), where + ".id");
    const std::string field = "scenario '" + s.id + "'";
    if (node["category"]) {
        try {
            s.category = parse_category(yaml::as<std::string>(node["category"], field + ".category"));
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), yaml::line(node["category"]), field + ".category");
        }
    }
    s.frames = yaml::as<Index>(yaml::required(node, "frames", field), field + ".frames");
    s.dim = yaml::as<Index>(yaml::required(node, "dim", field), field + ".dim");
    if (s.frames < 1) throw ParseError("frames must be >= 1", yaml::line(node["frames"]), field + ".frames");
    if (s.dim < 1) throw ParseError("dim must be >= 1", yaml::line(node["dim"]), field + ".dim");
    if (node["notes"]) s.notes = yaml::as<std::string>(node["notes"], field + ".notes");

    const auto conds = yaml::required(node, "conditions", field);
    yaml::require_map(conds, field + ".conditions");
    for (const auto& kv : conds) {
        const auto key = kv.first.as<std::string>();
        if (key == "custom") {
            yaml::require_map(kv.second, field + ".conditions.custom");
            for (const auto& c : kv.second) {
                const auto name = c.first.as<std::string>();
                s.conditions.emplace(ConditionId::custom(name),
                                     read_condition(c.second, s.dim, field + ".conditions.custom." + name));
            }
        } else if (key == "initial" || key == "final" || key == "neutral") {
            s.conditions.emplace(role_from_name(key), read_condition(kv.second, s.dim, field + ".conditions." + key));
        } else {
            throw ParseError("unknown condition role '" + key + "'", yaml::line(kv.first), field + ".conditions");
        }
    }

    if (const auto null = node["null"]) {
        if (!null.IsSequence()) throw ParseError("expected a list of {condition, weight}", yaml::line(null), field + ".null");
        std::vector<std::pair<ConditionId, double>> mix;
        for (const auto& entry : null) {
            yaml::require_map(entry, field + ".null");
            yaml::reject_unknown(entry, {"condition", "weight"}, field + ".null");
            mix.emplace_back(role_from_name(yaml::as<std::string>(yaml::required(entry, "condition", field + ".null"),
                                                                  field + ".null.condition")),
                             yaml::as<double>(yaml::required(entry, "weight", field + ".null"), field + ".null.weight"));
        }
        s.null_mixture = std::move(mix);
    }

    if (const auto emb = node["embedder"]) {
        yaml::require_map(emb, field + ".embedder");
        yaml::reject_unknown(emb, {"projection"}, field + ".embedder");
        const auto rows = yaml::required(emb, "projection", field + ".embedder");
        if (!rows.IsSequence() || rows.size() == 0)
            throw ParseError("projection must be a non-empty list of rows", yaml::line(rows), field + ".embedder.projection");
        Eigen::MatrixXd p(static_cast<Index>(rows.size()), s.dim);
        for (std::size_t r = 0; r < rows.size(); ++r)
            p.row(static_cast<Index>(r)) = read_vector(rows[r], s.dim, field + ".embedder.projection").transpose();
        s.projection = std::move(p);
    }
    return s;
}

}  // namespace

std::string_view to_string(Category c) {
    for (const auto& [name, value] : kCategories)
        if (value == c) return name;
    return "?";
}

Category parse_category(std::string_view s) {
    for (const auto& [name, value] : kCategories)
        if (name == s) return value;
    throw ConfigError("unknown category '" + std::string(s) + "'");
}

void ScenarioSpec::validate() const {
    auto fail = [&](const std::string& what) { throw ValidationError("scenario '" + id + "': " + what); };
    if (id.empty()) throw ValidationError("scenario with empty id");
    if (frames < 1 || dim < 1) fail("frames and dim must be >= 1");
    if (!has(ConditionId::initial())) fail("missing initial condition");
    if (!has(ConditionId::final())) fail("missing final condition");
    for (const auto& [cid, c] : conditions) {
        try {
            c.validate(dim);
        } catch (const Error& e) {
            fail("condition " + cid.str() + ": " + e.what());
        }
    }
    const auto& ci = conditions.at(ConditionId::initial());
    const auto& cf = conditions.at(ConditionId::final());
    if (ci.mean == cf.mean && ci.var == cf.var) fail("initial and final conditions are identical");
    if (projection && projection->cols() != dim) fail("embedder projection must have dim columns");
    if (projection) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(*projection);
        if (lu.rank() != projection->rows()) fail("embedder projection must have full row rank");
    }
    if (null_mixture) {
        if (null_mixture->empty()) fail("null mixture is empty");
        double total = 0;
        for (const auto& [cid, w] : *null_mixture) {
            if (!has(cid)) fail("null mixture references unknown condition " + cid.str());
            if (!(w > 0)) fail("null mixture weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9) fail("null mixture weights must sum to 1");
    }
}

std::vector<ScenarioSpec> parse_scenarios(std::string_view text, std::string_view source) {
    const YAML::Node root = yaml::load(text, source);
    yaml::require_map(root, "document");
    yaml::reject_unknown(root, {"schema_version", "scenarios"}, "document");
    yaml::check_schema_version(root, kSchemaVersion);

    const auto list = yaml::required(root, "scenarios", "document");
    if (!list.IsSequence()) throw ParseError("'scenarios' must be a list", yaml::line(list), "scenarios");

    std::vector<ScenarioSpec> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < list.size(); ++i) {
        auto s = read_scenario(list[i], i);
        if (!seen.insert(s.id).second) throw ValidationError("duplicate scenario id '" + s.id + "'");
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ScenarioSpec> load_scenarios(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenarios(buf.str(), path.string());
}

const ScenarioSpec& find_scenario(const std::vector<ScenarioSpec>& all, std::string_view id) {
    for (const auto& s : all)
        if (s.id == id) return s;
    throw ConfigError("no scenario with id '" + std::string(id) + "'");
}

AnalyticDenoiser<double> make_denoiser(const ScenarioSpec& s, const NoiseScheduled& sched) {
    AnalyticDenoiser<double> den(sched, s.dim);
    for (const auto& [cid, c] : s.conditions) den.add_condition(cid, c);
    if (s.null_mixture) den.set_null_mixture(*s.null_mixture);
    return den;
}

ToyLinearEmbedder<double> make_embedder(const ScenarioSpec& s) {
    std::map<ConditionId, Eigen::VectorXd> means;
    for (const auto& [cid, c] : s.conditions) means.emplace(cid, c.mean);
    if (s.projection) return ToyLinearEmbedder<double>(*s.projection, std::move(means));
    return ToyLinearEmbedder<double>::identity(s.dim, std::move(means));
}

}  // namespace fader::bench
