// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fader/sampler.hpp"

namespace fader::bench {

/// Everything needed to run the (scenario x mode x seed) matrix.
/// Defaults: T=50, tau=5, omega=12, alpha_max=1, deterministic DDIM.
struct RunConfig {
    ScheduleParams schedule = ScheduleParams::defaults(50);
    GuidanceSpec guidance;
    SamplerKind sampler;
    std::vector<GuidanceMode> modes{GuidanceMode::ours_anchored};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::uint64_t master_seed = 0;
    std::vector<std::string> scenario_ids;  // empty: every scenario in the file
    std::filesystem::path output_dir = "fader_out";
    unsigned threads = 1;

    void validate() const;
};

RunConfig parse_run_config(std::string_view text, std::string_view source = "<memory>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Hex FNV-1a of every knob that changes sampled values, seeds and modes
/// excluded (they are per-row columns).
std::string config_hash(const RunConfig& cfg);

/// "0-4,7,9" -> {0,1,2,3,4,7,9}
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
std::vector<GuidanceMode> parse_mode_list(std::string_view text);

/// Seed of the noise stream for one cell. Independent of mode, so all modes
/// of a (scenario, seed) pair start from the same z_T.
std::uint64_t cell_seed(std::uint64_t master_seed, std::string_view scenario_id, std::uint64_t seed);

}  // namespace fader::bench
