// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

// fader: desk-scale attribute-transition benchmark.
//
//   fader validate --scenarios data/scenarios.yaml
//   fader generate --scenarios data/scenarios.yaml --scenario canonical_1d --mode ours_anchored --seed 3 --out traj.csv
//   fader bench    --scenarios data/scenarios.yaml --out out/ --seeds 0-199 --modes ours_anchored,single_prompt
//   fader sweep    --scenarios data/scenarios.yaml --out out/ --param alpha_max --values 0,1,2,5

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fader/bench/benchmark.hpp"

namespace {

using namespace fader;
using namespace fader::bench;

struct Common {
    std::string scenarios_path;
    std::string config_path;
    std::string seeds;
    std::string modes;
    std::optional<std::uint64_t> master_seed;
    std::optional<double> omega;
    std::optional<Index> tau;
    std::optional<double> alpha_max;
    std::optional<unsigned> threads;
    std::string out;
};

void add_run_options(CLI::App* cmd, Common& c, bool with_lists) {
    cmd->add_option("--scenarios", c.scenarios_path, "Scenario file (YAML)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--config", c.config_path, "Run config file (YAML)")->check(CLI::ExistingFile);
    cmd->add_option("--master-seed", c.master_seed, "Master seed split per cell");
    cmd->add_option("--omega", c.omega, "CFG scale override");
    cmd->add_option("--tau", c.tau, "Neutral warmup steps override");
    cmd->add_option("--alpha-max", c.alpha_max, "Transition scale upper bound override");
    if (with_lists) {
        cmd->add_option("--seeds", c.seeds, "Seed list, e.g. 0-199 or 1,4,9");
        cmd->add_option("--modes", c.modes, "Comma-separated guidance modes");
        cmd->add_option("--threads", c.threads, "Worker threads");
    }
}

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
    if (!c.seeds.empty()) cfg.seeds = parse_seed_list(c.seeds);
    if (!c.modes.empty()) cfg.modes = parse_mode_list(c.modes);
    if (c.master_seed) cfg.master_seed = *c.master_seed;
    if (c.omega) cfg.guidance.omega = *c.omega;
    if (c.tau) cfg.guidance.tau = *c.tau;
    if (c.alpha_max) cfg.guidance.alpha_max = *c.alpha_max;
    if (c.threads) cfg.threads = *c.threads;
    if (!c.out.empty()) cfg.output_dir = c.out;
    cfg.validate();
    return cfg;
}

void print_summary(const BenchReport& report) {
    std::printf("%-24s %-22s %5s %5s %12s %12s %12s\n", "scenario", "mode", "n", "fail", "wholistic", "framewise",
                "last_attr");
    for (const auto& a : report.by_scenario)
        std::printf("%-24s %-22s %5zu %5zu %12.6f %12.6f %12.6f\n", a.group.c_str(),
                    std::string(to_string(a.mode)).c_str(), a.n_ok, a.n_failed, a.mean_wholistic, a.mean_framewise,
                    a.mean_last_attribute);
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("bad sweep value '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("sweep needs at least one value");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fader: frame-wise attribute-transition guidance benchmark"};
    app.require_subcommand(1);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse and check a scenario file");
    validate->add_option("--scenarios", validate_path, "Scenario file (YAML)")->required();

    Common gen;
    std::string gen_scenario, gen_mode = "ours_anchored";
    std::uint64_t gen_seed = 0;
    auto* generate_cmd = app.add_subcommand("generate", "Sample one video and write its per-frame trajectory CSV");
    add_run_options(generate_cmd, gen, false);
    generate_cmd->add_option("--scenario", gen_scenario, "Scenario id")->required();
    generate_cmd->add_option("--mode", gen_mode, "Guidance mode");
    generate_cmd->add_option("--seed", gen_seed, "Seed");
    generate_cmd->add_option("--out", gen.out, "Trajectory CSV path")->required();

    Common bench;
    auto* bench_cmd = app.add_subcommand("bench", "Run the scenario x mode x seed matrix and write reports");
    add_run_options(bench_cmd, bench, true);
    bench_cmd->add_option("--out", bench.out, "Output directory");

    Common sweep;
    std::string sweep_param, sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "Repeat the benchmark over values of alpha_max, omega or tau");
    add_run_options(sweep_cmd, sweep, true);
    sweep_cmd->add_option("--out", sweep.out, "Output directory");
    sweep_cmd->add_option("--param", sweep_param, "alpha_max | omega | tau")->required();
    sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            const auto scenarios = load_scenarios(validate_path);
            for (const auto& s : scenarios)
                std::printf("%-24s %-9s F=%-4ld D=%-4ld conditions=%zu\n", s.id.c_str(),
                            std::string(to_string(s.category)).c_str(), static_cast<long>(s.frames),
                            static_cast<long>(s.dim), s.conditions.size());
            std::printf("%zu scenario(s) OK\n", scenarios.size());
            return 0;
        }
        if (*generate_cmd) {
            const auto scenarios = load_scenarios(gen.scenarios_path);
            const std::string out = gen.out;
            gen.out.clear();
            const auto cfg = resolve(gen);
            const auto& scenario = find_scenario(scenarios, gen_scenario);
            const auto traj = generate(cfg, scenario, parse_guidance_mode(gen_mode), gen_seed);
            emit_trajectory_csv(traj, scenario, out);
            std::printf("wrote %s (%ld frames)\n", out.c_str(), static_cast<long>(scenario.frames));
            return 0;
        }
        if (*bench_cmd) {
            const auto scenarios = load_scenarios(bench.scenarios_path);
            const auto cfg = resolve(bench);
            const auto report = run_benchmark(cfg, scenarios);
            write_report(report, cfg, cfg.output_dir);
            print_summary(report);
            std::printf("wrote %s/report.csv and report.json\n", cfg.output_dir.string().c_str());
            return report.any_failed() ? 2 : 0;
        }
        if (*sweep_cmd) {
            const auto scenarios = load_scenarios(sweep.scenarios_path);
            const auto cfg = resolve(sweep);
            const auto param = parse_sweep_param(sweep_param);
            const auto points = run_sweep(cfg, scenarios, param, parse_values(sweep_values));
            bool failed = false;
            for (const auto& p : points) {
                char stem[64];
                std::snprintf(stem, sizeof stem, "report_%s_%g", std::string(to_string(param)).c_str(), p.value);
                write_report(p.report, p.config, cfg.output_dir, stem);
                failed = failed || p.report.any_failed();
            }
            write_text(cfg.output_dir / "sweep.csv", sweep_csv(param, points));
            std::fputs(sweep_csv(param, points).c_str(), stdout);
            return failed ? 2 : 0;
        }
    } catch (const fader::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
