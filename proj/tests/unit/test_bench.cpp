// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fader/bench/benchmark.hpp"
#include "oracles.hpp"

using namespace fader;
using namespace fader::bench;

namespace {

constexpr const char* kTwo = R"(schema_version: 1
scenarios:
  - id: one
    frames: 8
    dim: 2
    conditions:
      initial: {mean: [-1, 0.5], var: 0.1}
      final:   {mean: [ 1, 0.5], var: 0.1}
      neutral: {mean: 0, var: [0.1, 0.2]}
  - id: two
    category: hair
    frames: 6
    dim: 1
    conditions:
      initial: {mean: -1, var: 0.1}
      final:   {mean: 2, var: 0.1}
)";

std::vector<ScenarioSpec> shipped() { return load_scenarios(std::filesystem::path(FADER_DATA_DIR) / "scenarios.yaml"); }

RunConfig small_config() {
    RunConfig cfg;
    cfg.modes = {GuidanceMode::ours_anchored, GuidanceMode::single_prompt};
    cfg.seeds = {0, 1, 2, 3, 4};
    cfg.scenario_ids = {"canonical_1d"};
    return cfg;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string strip_timestamp(const std::string& text) { return text.substr(text.find('\n')); }

}  // namespace

TEST_CASE("shipped scenario file") {
    const auto all = shipped();
    CHECK(all.size() == 9);
    const auto& c = find_scenario(all, "canonical_1d");
    CHECK(c.frames == 32);
    CHECK(c.dim == 1);
    CHECK(c.conditions.at(ConditionId::initial()).mean(0) == -1.0);
    CHECK(c.conditions.at(ConditionId::final()).mean(0) == 1.0);
    CHECK(c.conditions.at(ConditionId::neutral()).var(0) == 0.1);
    CHECK_THROWS_AS(find_scenario(all, "missing"), ConfigError);
    for (const auto& s : all) CHECK_NOTHROW(s.validate());
}

TEST_CASE("parse a two-scenario document") {
    const auto all = parse_scenarios(kTwo);
    REQUIRE(all.size() == 2);
    CHECK(all[0].category == Category::custom);
    CHECK(all[0].conditions.at(ConditionId::neutral()).mean == Eigen::Vector2d(0, 0));
    CHECK(all[0].conditions.at(ConditionId::neutral()).var == Eigen::Vector2d(0.1, 0.2));
    CHECK(all[1].category == Category::hair);
    CHECK_FALSE(all[1].has(ConditionId::neutral()));
    const auto den = make_denoiser(all[0], build_schedule(ScheduleParams::defaults(20)));
    CHECK(den.dim() == 2);
    CHECK(make_embedder(all[0]).dim() == 2);
}

TEST_CASE("scenario validation and parse errors") {
    SUBCASE("identical initial and final") {
        const std::string text = R"(schema_version: 1
scenarios:
  - id: same
    frames: 4
    dim: 1
    conditions:
      initial: {mean: 0.5, var: 0.1}
      final:   {mean: 0.5, var: 0.1}
)";
        CHECK_THROWS_AS(parse_scenarios(text), ValidationError);
    }
    SUBCASE("duplicate ids") {
        std::string text = kTwo;
        text.replace(text.find("id: two"), 7, "id: one");
        CHECK_THROWS_AS(parse_scenarios(text), ValidationError);
    }
    SUBCASE("unknown key reports line and field") {
        std::string text = kTwo;
        text.replace(text.find("    dim: 1\n"), 11, "    dim: 1\n    colour: red\n");
        try {
            parse_scenarios(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 14);
            CHECK(e.field() == "scenarios[1]");
            CHECK(std::string(e.what()).find("colour") != std::string::npos);
        }
    }
    SUBCASE("list of the wrong length") {
        std::string text = kTwo;
        text.replace(text.find("[-1, 0.5]"), 9, "[-1, 0.5, 3]");
        try {
            parse_scenarios(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 7);
            CHECK(e.field().find("mean") != std::string::npos);
        }
    }
    SUBCASE("non-positive variance") {
        std::string text = kTwo;
        text.replace(text.find("var: [0.1, 0.2]"), 15, "var: [0.1, 0.0]");
        CHECK_THROWS_AS(parse_scenarios(text), Error);
    }
    SUBCASE("bad schema version and malformed yaml") {
        std::string text = kTwo;
        text.replace(0, 17, "schema_version: 2");
        CHECK_THROWS_AS(parse_scenarios(text), ParseError);
        CHECK_THROWS_AS(parse_scenarios("scenarios: [\n"), ParseError);
    }
}

TEST_CASE("run config parsing") {
    const auto cfg = load_run_config(std::filesystem::path(FADER_DATA_DIR) / "run_default.yaml");
    CHECK(cfg.schedule.steps == 50);
    CHECK(cfg.guidance.omega == 12.0);
    CHECK(cfg.guidance.tau == 5);
    CHECK(cfg.modes.size() == 4);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
    CHECK_FALSE(cfg.guidance.middle_frame.has_value());

    const auto custom = parse_run_config("schema_version: 1\nguidance: {alpha_max: 2.5, middle_frame: 3}\nseeds: [7, 9]\n");
    CHECK(custom.guidance.alpha_max == 2.5);
    CHECK(custom.guidance.middle_frame == Index(3));
    CHECK(custom.seeds == std::vector<std::uint64_t>{7, 9});

    CHECK_THROWS_AS(parse_run_config("schema_version: 1\nguidance: {omeg: 3}\n"), ParseError);
    CHECK_THROWS_AS(parse_run_config("schema_version: 1\nschedule: {steps: 10}\nguidance: {tau: 11}\n"), ValidationError);
    CHECK_THROWS_AS(parse_run_config("schema_version: 1\nmodes: [ours]\n"), Error);

    CHECK(parse_seed_list("0-4,7") == std::vector<std::uint64_t>{0, 1, 2, 3, 4, 7});
    CHECK(parse_seed_list("3") == std::vector<std::uint64_t>{3});
    CHECK_THROWS_AS(parse_seed_list("4-1"), ConfigError);
    CHECK_THROWS_AS(parse_seed_list("x"), ConfigError);
    CHECK(parse_mode_list("single_prompt,ours_anchored") ==
          std::vector{GuidanceMode::single_prompt, GuidanceMode::ours_anchored});
    CHECK_THROWS_AS(parse_mode_list("ours_anchored,nope"), ConfigError);
}

TEST_CASE("config hash tracks sampled-value knobs only") {
    RunConfig a;
    RunConfig b = a;
    b.seeds = {11, 12};
    b.modes = {GuidanceMode::single_prompt};
    b.threads = 4;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.guidance.alpha_max = 2.0;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.master_seed = 1;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("cell seeds") {
    CHECK(cell_seed(0, "a", 1) == cell_seed(0, "a", 1));
    CHECK(cell_seed(0, "a", 1) != cell_seed(0, "b", 1));
    CHECK(cell_seed(0, "a", 1) != cell_seed(0, "a", 2));
    CHECK(cell_seed(0, "a", 1) != cell_seed(1, "a", 1));
}

TEST_CASE("benchmark rows and aggregates") {
    const auto all = shipped();
    const auto cfg = small_config();
    const auto report = run_benchmark(cfg, all);
    REQUIRE(report.rows.size() == 10);
    CHECK_FALSE(report.any_failed());
    CHECK(report.rows[0].mode == GuidanceMode::ours_anchored);
    CHECK(report.rows[5].mode == GuidanceMode::single_prompt);
    for (std::size_t i = 0; i < 5; ++i) CHECK(report.rows[i].seed == i);

    const std::string csv = report_csv(report, "T");
    const auto rows = csv_rows(csv);
    REQUIRE(rows.size() == 11);
    CHECK(csv.rfind("# fader report generated T\n", 0) == 0);
    {
        std::string header;
        for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
        CHECK(header == kReportColumns);
    }
    REQUIRE(report.by_scenario.size() == 2);
    for (const auto& agg : report.by_scenario) {
        std::vector<double> w, f;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r][2] != to_string(agg.mode)) continue;
            w.push_back(std::stod(rows[r][4]));
            f.push_back(std::stod(rows[r][5]));
            CHECK(rows[r][8] == report.config_hash);
        }
        REQUIRE(w.size() == 5);
        const auto mw = oracle::mean_se(w), mf = oracle::mean_se(f);
        CHECK(std::abs(agg.mean_wholistic - mw.mean) <= 1e-12);
        CHECK(std::abs(agg.std_wholistic - mw.se * std::sqrt(5.0)) <= 1e-12);
        CHECK(std::abs(agg.mean_framewise - mf.mean) <= 1e-12);
        CHECK(agg.n_ok == 5);
    }
    CHECK(report.by_scenario[0].mean_wholistic > report.by_scenario[1].mean_wholistic);

    const auto json = report_json(report, cfg, "T");
    CHECK(json.find("\"config_hash\"") != std::string::npos);
    CHECK(json.find("canonical_1d") != std::string::npos);
}

TEST_CASE("reports are deterministic across thread counts") {
    const auto all = shipped();
    RunConfig cfg;
    cfg.modes = {GuidanceMode::ours_anchored, GuidanceMode::naive_additive, GuidanceMode::prompt_interpolation,
                 GuidanceMode::single_prompt};
    cfg.seeds = {0, 1, 2};
    cfg.threads = 1;
    const auto serial = report_csv(run_benchmark(cfg, all), "A");
    const auto again = report_csv(run_benchmark(cfg, all), "A");
    cfg.threads = 4;
    const auto parallel = report_csv(run_benchmark(cfg, all), "B");
    CHECK(serial == again);
    CHECK(strip_timestamp(serial) == strip_timestamp(parallel));
    CHECK(csv_rows(serial).size() == 1 + 9 * 4 * 3);
}

TEST_CASE("a failing cell is recorded, not fatal") {
    std::string text = kTwo;
    auto all = parse_scenarios(text);
    RunConfig cfg;
    cfg.modes = {GuidanceMode::ours_anchored, GuidanceMode::prompt_interpolation};
    cfg.seeds = {0};
    const auto report = run_benchmark(cfg, all);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.any_failed());
    // "two" has no neutral prompt, so the anchored mode cannot run there.
    CHECK(report.rows[2].scenario == "two");
    CHECK_FALSE(report.rows[2].ok());
    CHECK(report.rows[2].error.find("neutral") != std::string::npos);
    CHECK(report.rows[3].ok());
    const auto rows = csv_rows(report_csv(report, "T"));
    CHECK_FALSE(rows[3][7].empty());
    CHECK(rows[3][7].find(',') == std::string::npos);
}

TEST_CASE("alpha_max sweep") {
    const auto all = shipped();
    auto cfg = small_config();
    cfg.modes = {GuidanceMode::ours_anchored};
    const auto points = run_sweep(cfg, all, SweepParam::alpha_max, {0, 1, 2, 5});
    REQUIRE(points.size() == 4);
    CHECK(points[1].config.guidance.alpha_max == 1.0);
    CHECK(points[1].report.config_hash != points[2].report.config_hash);
    const double a0 = points[0].report.by_scenario[0].mean_abs_last_attribute;
    const double a1 = points[1].report.by_scenario[0].mean_abs_last_attribute;
    const double a2 = points[2].report.by_scenario[0].mean_abs_last_attribute;
    CHECK(a0 < a1);
    CHECK(a1 < a2);
    const auto rows = csv_rows(sweep_csv(SweepParam::alpha_max, points));
    CHECK(rows.size() == 5);
    CHECK(rows[0][0] == "param");
    CHECK_THROWS_AS(parse_sweep_param("beta"), ConfigError);
}

TEST_CASE("trajectory csv") {
    const auto all = shipped();
    const auto& s = find_scenario(all, "canonical_1d");
    RunConfig cfg;
    const auto traj = generate(cfg, s, GuidanceMode::ours_anchored, 3);
    const auto text = trajectory_csv(traj, s);
    const auto rows = csv_rows(text);
    REQUIRE(rows.size() == 33);
    CHECK(rows[0] == std::vector<std::string>{"frame", "z0_0", "attribute"});
    for (std::size_t r = 1; r < rows.size(); ++r) {
        REQUIRE(rows[r].size() == 3);
        CHECK(std::stoi(rows[r][0]) == static_cast<int>(r - 1));
        CHECK(rows[r][1] == rows[r][2]);  // identity embedder, one coordinate
    }
    CHECK(std::stod(rows[1][2]) < 0.0);
    CHECK(std::stod(rows[32][2]) > 0.0);
    CHECK(text == trajectory_csv(generate(cfg, s, GuidanceMode::ours_anchored, 3), s));

    const auto dir = std::filesystem::temp_directory_path() / "fader_test_bench";
    std::filesystem::remove_all(dir);
    emit_trajectory_csv(traj, s, dir / "t.csv");
    std::ifstream in(dir / "t.csv");
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == text);

    write_report(run_benchmark(small_config(), all), small_config(), dir / "rep");
    CHECK(std::filesystem::exists(dir / "rep" / "report.csv"));
    CHECK(std::filesystem::exists(dir / "rep" / "report.json"));
    std::filesystem::remove_all(dir);
}
