// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fader/bench/run_config.hpp"
#include "fader/bench/scenario.hpp"

namespace fader::bench {

struct CellResult {
    std::string scenario;
    Category category = Category::custom;
    GuidanceMode mode = GuidanceMode::ours_anchored;
    std::uint64_t seed = 0;
    double wholistic = 0;
    double framewise = 0;
    Index static_pair_count = 0;
    double last_attribute = 0;  // final frame's position along the prompt direction
    std::string error;          // empty on success

    bool ok() const noexcept { return error.empty(); }
};

struct Aggregate {
    std::string group;  // scenario id or category name
    GuidanceMode mode = GuidanceMode::ours_anchored;
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
    double mean_wholistic = 0, std_wholistic = 0;
    double mean_framewise = 0, std_framewise = 0;
    double mean_last_attribute = 0, mean_abs_last_attribute = 0, var_last_attribute = 0;
};

struct BenchReport {
    std::string config_hash;
    std::vector<CellResult> rows;
    std::vector<Aggregate> by_scenario;
    std::vector<Aggregate> by_category;

    bool any_failed() const;
};

/// Run every (scenario x mode x seed) cell. Rows come back in
/// scenario-file, mode-list, seed-list order whatever the thread count.
BenchReport run_benchmark(const RunConfig& cfg, const std::vector<ScenarioSpec>& scenarios);

/// Mean/std per group over successful rows, in first-appearance order.
std::vector<Aggregate> aggregate_rows(const std::vector<CellResult>& rows, bool by_category);

inline constexpr std::string_view kReportColumns =
    "scenario,category,mode,seed,wholistic,framewise,static_pair_count,error,config_hash";

std::string report_csv(const BenchReport& report, std::string_view timestamp);
std::string report_json(const BenchReport& report, const RunConfig& cfg, std::string_view timestamp);
void write_report(const BenchReport& report, const RunConfig& cfg, const std::filesystem::path& dir,
                  std::string_view stem = "report");

/// One row per frame of z0: frame, z0_0..z0_{D-1}, attribute.
std::string trajectory_csv(const Trajectory<double>& traj, const ScenarioSpec& scenario);
void emit_trajectory_csv(const Trajectory<double>& traj, const ScenarioSpec& scenario,
                         const std::filesystem::path& path);

Trajectory<double> generate(const RunConfig& cfg, const ScenarioSpec& scenario, GuidanceMode mode,
                            std::uint64_t seed);

enum class SweepParam { alpha_max, omega, tau };
std::string_view to_string(SweepParam p);
SweepParam parse_sweep_param(std::string_view s);

struct SweepPoint {
    double value = 0;
    RunConfig config;
    BenchReport report;
};

std::vector<SweepPoint> run_sweep(const RunConfig& cfg, const std::vector<ScenarioSpec>& scenarios, SweepParam param,
                                  const std::vector<double>& values);
std::string sweep_csv(SweepParam param, const std::vector<SweepPoint>& points);

std::string utc_timestamp();
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace fader::bench
