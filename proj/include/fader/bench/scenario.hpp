// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fader/metrics.hpp"
#include "fader/sampler.hpp"

namespace fader::bench {

inline constexpr int kSchemaVersion = 1;

/// Attribute-transition families; used only to group report rows.
enum class Category { age, beard, makeup, hair, color, material, light, weather, custom };

std::string_view to_string(Category c);
Category parse_category(std::string_view s);

/// One desk-scale transition task: Gaussian stand-ins for the initial,
/// final and neutral prompts over F frames of D-dimensional latents.
struct ScenarioSpec {
    std::string id;
    Category category = Category::custom;
    Index frames = 32;
    Index dim = 1;
    std::string notes;
    std::map<ConditionId, GaussianConditiond> conditions;
    std::optional<std::vector<std::pair<ConditionId, double>>> null_mixture;
    std::optional<Eigen::MatrixXd> projection;  // E x D; identity when absent

    bool has(const ConditionId& c) const { return conditions.contains(c); }

    /// Throws ValidationError naming the scenario and the broken invariant.
    void validate() const;
};

std::vector<ScenarioSpec> parse_scenarios(std::string_view text, std::string_view source = "<memory>");
std::vector<ScenarioSpec> load_scenarios(const std::filesystem::path& path);

const ScenarioSpec& find_scenario(const std::vector<ScenarioSpec>& all, std::string_view id);

AnalyticDenoiser<double> make_denoiser(const ScenarioSpec& s, const NoiseScheduled& sched);
ToyLinearEmbedder<double> make_embedder(const ScenarioSpec& s);

}  // namespace fader::bench
