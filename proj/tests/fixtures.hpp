// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "fader/metrics.hpp"
#include "fader/sampler.hpp"

namespace fixture {

using namespace fader;

/// initial = -1, final = +1, neutral = 0, var 0.1, one coordinate, 32 frames.
struct Canonical {
    static constexpr Index kFrames = 32;
    static constexpr double kVar = 0.1;

    NoiseScheduled sched = build_schedule(ScheduleParams::defaults(50));
    AnalyticDenoiser<double> den = make(sched);
    ToyLinearEmbedder<double> emb = ToyLinearEmbedder<double>::identity(
        1, {{ConditionId::initial(), Eigen::VectorXd::Constant(1, -1.0)},
            {ConditionId::final(), Eigen::VectorXd::Constant(1, 1.0)},
            {ConditionId::neutral(), Eigen::VectorXd::Constant(1, 0.0)}});

    static AnalyticDenoiser<double> make(const NoiseScheduled& s) {
        AnalyticDenoiser<double> d(s, 1);
        d.add_condition(ConditionId::initial(), GaussianConditiond::isotropic(1, -1.0, kVar));
        d.add_condition(ConditionId::final(), GaussianConditiond::isotropic(1, 1.0, kVar));
        d.add_condition(ConditionId::neutral(), GaussianConditiond::isotropic(1, 0.0, kVar));
        return d;
    }

    static GuidanceSpec spec(GuidanceMode mode, double alpha_max = 1.0) {
        GuidanceSpec g;
        g.mode = mode;
        g.omega = 12.0;
        g.tau = 5;
        g.alpha_max = alpha_max;
        return g;
    }

    Trajectory<double> run(const GuidanceSpec& g, std::uint64_t seed,
                           const SamplerKind& kind = SamplerKind::ddim()) const {
        Rng rng(seed);
        return sample_video(g, kind, ConditionSet{}, kFrames, den, sched, rng);
    }
};

}  // namespace fixture
