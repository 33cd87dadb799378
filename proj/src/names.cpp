// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <string>
#include <utility>

#include "fader/sampler.hpp"

namespace fader {
namespace {

template <typename E, std::size_t N>
E lookup(const std::array<std::pair<std::string_view, E>, N>& table, std::string_view s, std::string_view what) {
    for (const auto& [name, value] : table)
        if (name == s) return value;
    std::string known;
    for (const auto& [name, value] : table) known += (known.empty() ? "" : ", ") + std::string(name);
    throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "' (expected one of: " + known + ")");
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<std::string_view, E>, N>& table, E v) {
    for (const auto& [name, value] : table)
        if (value == v) return name;
    return "?";
}

constexpr std::array<std::pair<std::string_view, GuidanceMode>, 4> kModes{{
    {"ours_anchored", GuidanceMode::ours_anchored},
    {"naive_additive", GuidanceMode::naive_additive},
    {"single_prompt", GuidanceMode::single_prompt},
    {"prompt_interpolation", GuidanceMode::prompt_interpolation},
}};

constexpr std::array<std::pair<std::string_view, DirectionNorm>, 2> kNorms{{
    {"global", DirectionNorm::global},
    {"per_frame", DirectionNorm::per_frame},
}};

constexpr std::array<std::pair<std::string_view, DirectionPolicy>, 2> kPolicies{{
    {"recompute", DirectionPolicy::recompute},
    {"freeze_after_tau", DirectionPolicy::freeze_after_tau},
}};

constexpr std::array<std::pair<std::string_view, SamplerKind::Type>, 2> kSamplers{{
    {"ddim", SamplerKind::Type::ddim},
    {"ddpm_ancestral", SamplerKind::Type::ddpm_ancestral},
}};

}  // namespace

std::string_view to_string(GuidanceMode m) { return name_of(kModes, m); }
GuidanceMode parse_guidance_mode(std::string_view s) { return lookup(kModes, s, "guidance mode"); }
std::string_view to_string(DirectionNorm n) { return name_of(kNorms, n); }
DirectionNorm parse_direction_norm(std::string_view s) { return lookup(kNorms, s, "direction normalization"); }
std::string_view to_string(DirectionPolicy p) { return name_of(kPolicies, p); }
DirectionPolicy parse_direction_policy(std::string_view s) { return lookup(kPolicies, s, "direction policy"); }
std::string_view to_string(SamplerKind::Type t) { return name_of(kSamplers, t); }
SamplerKind::Type parse_sampler_type(std::string_view s) { return lookup(kSamplers, s, "sampler kind"); }

}  // namespace fader
