// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "fader/guidance.hpp"

using namespace fader;

namespace {

AnalyticDenoiser<double> random_denoiser(std::mt19937_64& gen, const NoiseScheduled& s, Index dim) {
    std::uniform_real_distribution<double> mu(-2, 2), var(0.05, 2);
    auto cond = [&] {
        GaussianConditiond c{Eigen::VectorXd(dim), Eigen::VectorXd(dim)};
        for (Index i = 0; i < dim; ++i) {
            c.mean(i) = mu(gen);
            c.var(i) = var(gen);
        }
        return c;
    };
    AnalyticDenoiser<double> den(s, dim);
    den.add_condition(ConditionId::initial(), cond());
    den.add_condition(ConditionId::final(), cond());
    den.add_condition(ConditionId::neutral(), cond());
    return den;
}

TransitionalDirection<double> unit_rows(Index frames, Index dim, double value) {
    FrameMatrix<double> d = FrameMatrix<double>::Constant(frames, dim, value);
    const double n = d.norm();
    return {d / n, n};
}

}  // namespace

TEST_CASE("cfg_epsilon") {
    Rng rng(1);
    const auto c = rng.normal_video(4, 3);
    const auto u = rng.normal_video(4, 3);

    CHECK(cfg_epsilon(c, u, 0.0) == c);
    for (double w : {0.5, 3.0, 12.0, 100.0}) CHECK(cfg_epsilon(c, c, w) == c);

    const auto out = cfg_epsilon(LatentVideod::constant(2, 2, 0.1), LatentVideod::constant(2, 2, 0.05), 12.0);
    // (1 + 12) * 0.1 - 12 * 0.05
    CHECK((out.data().array() - 0.70).abs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(cfg_epsilon(c, LatentVideod(3, 3), 1.0), ShapeMismatch);
}

TEST_CASE("transitional direction is unit norm and antisymmetric") {
    const auto s = build_schedule(ScheduleParams::defaults(50));
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<Index> frames_d(1, 12), dim_d(1, 5), t_d(1, 50);
    for (int i = 0; i < 200; ++i) {
        const Index dim = dim_d(gen);
        const auto den = random_denoiser(gen, s, dim);
        Rng rng(gen());
        const auto z = rng.normal_video(frames_d(gen), dim);
        const Index t = t_d(gen);
        const auto fwd = transitional_direction(z, t, ConditionId::initial(), ConditionId::final(), den);
        const auto back = transitional_direction(z, t, ConditionId::final(), ConditionId::initial(), den);
        CHECK(std::abs(fwd.data.norm() - 1.0) <= 1e-12);
        CHECK((fwd.data + back.data).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(fwd.raw_norm == doctest::Approx(back.raw_norm).epsilon(1e-14));
    }
}

TEST_CASE("transitional direction for 1-D Gaussians at alpha_bar 0.5") {
    const auto s = build_schedule(2, 0.5, 0.5, ScheduleKind::linear);
    AnalyticDenoiser<double> den(s, 1);
    den.add_condition(ConditionId::initial(), GaussianConditiond::isotropic(1, -1.0, 1.0));
    den.add_condition(ConditionId::final(), GaussianConditiond::isotropic(1, 1.0, 1.0));
    const Index frames = 4;
    const auto z = LatentVideod::from_expr(FrameMatrix<double>(Eigen::VectorXd::LinSpaced(frames, -1.0, 2.0)));

    // Two independent score evaluations, subtracted by hand.
    const auto eps_i = analytic_epsilon(z, 1, den.lookup(ConditionId::initial()), s);
    const auto eps_f = analytic_epsilon(z, 1, den.lookup(ConditionId::final()), s);
    const FrameMatrix<double> delta = eps_f.data() - eps_i.data();

    // Closed form per coordinate: sigma sqrt(ab) (mu_I - mu_F) / (ab s^2 + 1 - ab).
    const double closed = s.sigma(1) * std::sqrt(0.5) * (-2.0) / 1.0;
    CHECK((delta.array() - closed).abs().maxCoeff() < 1e-15);

    const auto dir = transitional_direction(z, 1, ConditionId::initial(), ConditionId::final(), den);
    CHECK(dir.raw_norm == doctest::Approx(std::abs(closed) * std::sqrt(double(frames))).epsilon(1e-14));
    CHECK((dir.data - delta / delta.norm()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((dir.data.array() + 0.5).abs().maxCoeff() < 1e-15);  // -1 / sqrt(4)
}

TEST_CASE("degenerate directions are errors") {
    const auto s = build_schedule(ScheduleParams::defaults(50));
    AnalyticDenoiser<double> den(s, 2);
    den.add_condition(ConditionId::initial(), GaussianConditiond::isotropic(2, 0.3, 0.5));
    den.add_condition(ConditionId::final(), GaussianConditiond::isotropic(2, 0.3, 0.5));
    const auto z = LatentVideod(3, 2);
    CHECK_THROWS_AS(transitional_direction(z, 10, ConditionId::initial(), ConditionId::final(), den),
                    DegenerateDirection);
    CHECK_THROWS_AS(transitional_direction(z, 10, ConditionId::initial(), ConditionId::initial(), den),
                    DegenerateDirection);
}

TEST_CASE("per-frame normalisation gives unit rows") {
    Rng rng(8);
    const auto a = rng.normal_video(5, 3);
    const auto b = rng.normal_video(5, 3);
    const auto dir = transitional_direction(a, b, DirectionNorm::per_frame);
    for (Index j = 0; j < 5; ++j) CHECK(dir.data.row(j).norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(dir.raw_norm == doctest::Approx((b.data() - a.data()).norm()).epsilon(1e-14));
}

TEST_CASE("alpha_at") {
    GuidanceSpec spec;
    spec.alpha_max = 1.0;
    CHECK(alpha_at(0, FrameSide::following, spec, 32) == 0.0);
    CHECK(alpha_at(0, FrameSide::preceding, spec, 32) == 0.0);
    CHECK(spec.middle(32) == 16);
    CHECK(alpha_at(15, FrameSide::following, spec, 32) == 1.0);  // frame 31
    CHECK(alpha_at(16, FrameSide::preceding, spec, 32) == 1.0);  // frame 0
    CHECK(alpha_at(8, FrameSide::preceding, spec, 32) == 0.5);
    spec.alpha_max = 2.0;
    CHECK(alpha_at(15, FrameSide::following, spec, 32) == 2.0);
    CHECK_THROWS_AS(alpha_at(16, FrameSide::following, spec, 32), ConfigError);
    CHECK_THROWS_AS(alpha_at(-1, FrameSide::preceding, spec, 32), ConfigError);
}

TEST_CASE("signed anchored coefficients are nondecreasing across frames") {
    for (Index frames : {Index(1), Index(2), Index(3), Index(16), Index(32), Index(33)}) {
        for (double amax : {0.0, 1.0, 2.5}) {
            GuidanceSpec spec;
            spec.alpha_max = amax;
            const auto c = anchored_coefficients(spec, frames);
            CHECK(c[static_cast<std::size_t>(spec.middle(frames))] == 0.0);
            for (std::size_t j = 1; j < c.size(); ++j) CHECK(c[j] >= c[j - 1]);
            if (frames > 2) {
                CHECK(c.front() == -amax);
                CHECK(c.back() == amax);
            }
        }
    }
}

TEST_CASE("refined_epsilon_naive") {
    Rng rng(2);
    const auto eps_i = rng.normal_video(6, 2);
    const auto dir = transitional_direction(eps_i, rng.normal_video(6, 2));
    GuidanceSpec spec;

    spec.alpha_max = 0.0;
    CHECK(refined_epsilon_naive(eps_i, dir, spec) == eps_i);

    spec.alpha_max = 1.7;
    const auto out = refined_epsilon_naive(eps_i, dir, spec);
    CHECK(out.frame(0) == eps_i.frame(0));
    CHECK((out.frame(5) - (eps_i.frame(5) + 1.7 * dir.data.row(5))).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((out.frame(2) - (eps_i.frame(2) + 1.7 * 0.4 * dir.data.row(2))).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(refined_epsilon_naive(rng.normal_video(5, 2), dir, spec), ShapeMismatch);
}

TEST_CASE("naive refinement recovers the final score for one frame") {
    const auto s = build_schedule(ScheduleParams::defaults(50));
    std::mt19937_64 gen(31);
    for (int i = 0; i < 50; ++i) {
        const auto den = random_denoiser(gen, s, 3);
        Rng rng(gen());
        const auto z = rng.normal_video(1, 3);
        const Index t = 1 + static_cast<Index>(gen() % 50);
        const auto eps_i = den.evaluate(z, t, ConditionId::initial());
        const auto eps_f = den.evaluate(z, t, ConditionId::final());
        const auto dir = transitional_direction(eps_i, eps_f);
        const std::vector<double> scale{dir.raw_norm};
        const auto out = refined_epsilon_naive(eps_i, dir, std::span<const double>(scale));
        CHECK((out.data() - eps_f.data()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("refined_epsilon_anchored") {
    Rng rng(3);

    SUBCASE("middle frame is the neutral score bit for bit") {
        for (Index frames : {Index(1), Index(2), Index(7), Index(32)}) {
            const auto eps_n = rng.normal_video(frames, 3);
            const auto dir = transitional_direction(eps_n, rng.normal_video(frames, 3));
            GuidanceSpec spec;
            spec.alpha_max = 3.0;
            const Index m = spec.middle(frames);
            const auto out = refined_epsilon_anchored(eps_n, dir, spec);
            for (Index i = 0; i < 3; ++i) CHECK(std::memcmp(&out.data()(m, i), &eps_n.data()(m, i), sizeof(double)) == 0);
        }
    }
    SUBCASE("alpha_max 0 leaves the neutral score untouched") {
        const auto eps_n = rng.normal_video(9, 2);
        const auto dir = transitional_direction(eps_n, rng.normal_video(9, 2));
        GuidanceSpec spec;
        spec.alpha_max = 0.0;
        CHECK(refined_epsilon_anchored(eps_n, dir, spec) == eps_n);
    }
    SUBCASE("three frames expand elementwise") {
        const auto eps_n = rng.normal_video(3, 2);
        const auto dir = unit_rows(3, 2, 0.8);
        GuidanceSpec spec;
        spec.alpha_max = 1.0;
        REQUIRE(spec.middle(3) == 1);
        const auto out = refined_epsilon_anchored(eps_n, dir, spec);
        for (Index i = 0; i < 2; ++i) {
            CHECK(out.data()(0, i) == eps_n.data()(0, i) - dir.data(0, i));
            CHECK(out.data()(1, i) == eps_n.data()(1, i));
            CHECK(out.data()(2, i) == eps_n.data()(2, i) + dir.data(2, i));
        }
    }
    SUBCASE("explicit middle frame") {
        const auto eps_n = rng.normal_video(5, 1);
        const auto dir = unit_rows(5, 1, 1.0);
        GuidanceSpec spec;
        spec.middle_frame = 1;
        const auto out = refined_epsilon_anchored(eps_n, dir, spec);
        const double u = dir.data(0, 0);
        CHECK(out.data()(0, 0) == doctest::Approx(eps_n.data()(0, 0) - u));
        CHECK(out.data()(1, 0) == eps_n.data()(1, 0));
        CHECK(out.data()(2, 0) == doctest::Approx(eps_n.data()(2, 0) + u / 3.0));
        CHECK(out.data()(4, 0) == doctest::Approx(eps_n.data()(4, 0) + u));
        spec.middle_frame = 5;
        CHECK_THROWS_AS(refined_epsilon_anchored(eps_n, dir, spec), ConfigError);
    }
}

TEST_CASE("changing the direction at one frame changes only that frame") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 40; ++trial) {
        Rng rng(gen());
        const Index frames = 2 + static_cast<Index>(gen() % 20);
        const auto eps = rng.normal_video(frames, 3);
        auto dir = transitional_direction(eps, rng.normal_video(frames, 3));
        GuidanceSpec spec;
        spec.alpha_max = 1.5;
        const auto before_anchor = refined_epsilon_anchored(eps, dir, spec);
        const auto before_naive = refined_epsilon_naive(eps, dir, spec);
        const Index j = static_cast<Index>(gen() % static_cast<std::uint64_t>(frames));
        dir.data.row(j) *= -2.0;
        const auto after_anchor = refined_epsilon_anchored(eps, dir, spec);
        const auto after_naive = refined_epsilon_naive(eps, dir, spec);
        for (Index k = 0; k < frames; ++k) {
            if (k == j) continue;
            CHECK(after_anchor.frame(k) == before_anchor.frame(k));
            CHECK(after_naive.frame(k) == before_naive.frame(k));
        }
    }
}

TEST_CASE("prompt interpolation blend") {
    const auto s = build_schedule(ScheduleParams::defaults(50));
    AnalyticDenoiser<double> den(s, 2);
    den.add_condition(ConditionId::initial(), GaussianConditiond::isotropic(2, -1, 0.3));
    den.add_condition(ConditionId::final(), GaussianConditiond::isotropic(2, 1, 0.3));
    Rng rng(6);
    const auto z = rng.normal_video(7, 2);
    const Index t = 20;
    const auto eps_i = den.evaluate(z, t, ConditionId::initial());
    const auto eps_f = den.evaluate(z, t, ConditionId::final());

    const auto out = interpolated_condition_epsilon(z, t, ConditionId::initial(), ConditionId::final(), den);
    CHECK(out.frame(0) == eps_i.frame(0));
    CHECK(out.frame(6) == eps_f.frame(6));

    const auto same = interpolated_condition_epsilon(z, t, ConditionId::initial(), ConditionId::initial(), den);
    CHECK((same.data() - eps_i.data()).cwiseAbs().maxCoeff() < 1e-15);

    const auto mid = interpolated_epsilon(LatentVideod::constant(3, 1, 0.2), LatentVideod::constant(3, 1, 0.6));
    CHECK(mid.data()(1, 0) == doctest::Approx(0.4).epsilon(1e-15));

    CHECK_THROWS_AS(interpolated_epsilon(LatentVideod(1, 1), LatentVideod(1, 1)), ShapeMismatch);
}

TEST_CASE("guidance spec validation") {
    GuidanceSpec spec;
    CHECK_NOTHROW(spec.validate(50, 32));
    spec.tau = 51;
    CHECK_THROWS_AS(spec.validate(50, 32), ConfigError);
    spec.tau = 5;
    spec.omega = -1;
    CHECK_THROWS_AS(spec.validate(50, 32), ConfigError);
    spec.omega = 12;
    spec.middle_frame = 32;
    CHECK_THROWS_AS(spec.validate(50, 32), ConfigError);
    CHECK(parse_guidance_mode("prompt_interpolation") == GuidanceMode::prompt_interpolation);
    CHECK(to_string(GuidanceMode::naive_additive) == "naive_additive");
    CHECK_THROWS_AS(parse_guidance_mode("bogus"), ConfigError);
}
