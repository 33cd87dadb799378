// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "fader/guidance.hpp"

namespace fader {

struct SamplerKind {
    enum class Type { ddim, ddpm_ancestral };

    Type type = Type::ddim;
    double eta = 0.0;  // ddim only; 0 is deterministic

    static SamplerKind ddim(double eta = 0.0) { return {Type::ddim, eta}; }
    static SamplerKind ddpm() { return {Type::ddpm_ancestral, 1.0}; }

    bool deterministic() const noexcept { return type == Type::ddim && eta == 0.0; }
};

std::string_view to_string(SamplerKind::Type t);
SamplerKind::Type parse_sampler_type(std::string_view s);

/// Prompt roles a sampling run may consult.
struct ConditionSet {
    ConditionId initial = ConditionId::initial();
    ConditionId final = ConditionId::final();
    ConditionId neutral = ConditionId::neutral();
    ConditionId null = ConditionId::null();
};

/// Denoising path z_T .. z_0; zs[t] is the latent at step t, zs[0] the clean sample.
template <typename Scalar>
struct Trajectory {
    std::vector<LatentVideo<Scalar>> zs;
    GuidanceMode mode;
    std::uint64_t seed;

    const LatentVideo<Scalar>& final_sample() const { return zs.front(); }
    Index steps() const { return static_cast<Index>(zs.size()) - 1; }
};

/// One reverse step z_t -> z_{t-1} given the guided noise estimate.
///
/// DDIM: z_{t-1} = sqrt(ab_{t-1}) x0 + sqrt(1 - ab_{t-1} - s^2) eps + s noise,
/// with s = eta sqrt((1 - ab_{t-1}) / (1 - ab_t)) sqrt(1 - ab_t / ab_{t-1}).
/// DDPM: sample the Gaussian posterior q(z_{t-1} | z_t, x0).
/// Noise is drawn only when the step is stochastic.
template <typename Scalar>
LatentVideo<Scalar> step(const LatentVideo<Scalar>& zt, Index t, const LatentVideo<Scalar>& eps_hat,
                         const NoiseSchedule<Scalar>& sched, const SamplerKind& kind, Rng& rng) {
    require_same_shape(zt, eps_hat, "step");
    if (t < 1 || t > sched.steps())
        throw StepOutOfRange("step t=" + std::to_string(t) + " outside [1, " + std::to_string(sched.steps()) + "]");
    const Scalar ab = sched.alpha_bar(t);
    const Scalar ab_prev = sched.alpha_bar(t - 1);
    const FrameMatrix<Scalar> x0 = (zt.data() - sched.sigma(t) * eps_hat.data()) / std::sqrt(ab);

    if (kind.type == SamplerKind::Type::ddim) {
        if (!(kind.eta >= 0.0 && kind.eta <= 1.0)) throw ConfigError("ddim eta must lie in [0, 1]");
        const Scalar noise_sd = static_cast<Scalar>(kind.eta) * std::sqrt((Scalar(1) - ab_prev) / (Scalar(1) - ab)) *
                                std::sqrt(Scalar(1) - ab / ab_prev);
        const Scalar dir_coeff = std::sqrt(std::max(Scalar(0), Scalar(1) - ab_prev - noise_sd * noise_sd));
        FrameMatrix<Scalar> next = std::sqrt(ab_prev) * x0 + dir_coeff * eps_hat.data();
        if (noise_sd > Scalar(0)) next += noise_sd * rng.normal_video<Scalar>(zt.frames(), zt.dim()).data();
        return LatentVideo<Scalar>(std::move(next));
    }

    const Scalar beta = sched.beta(t);
    const Scalar c_x0 = std::sqrt(ab_prev) * beta / (Scalar(1) - ab);
    const Scalar c_zt = std::sqrt(sched.alpha(t)) * (Scalar(1) - ab_prev) / (Scalar(1) - ab);
    const Scalar post_var = (Scalar(1) - ab_prev) / (Scalar(1) - ab) * beta;
    FrameMatrix<Scalar> next = c_x0 * x0 + c_zt * zt.data();
    if (post_var > Scalar(0)) next += std::sqrt(post_var) * rng.normal_video<Scalar>(zt.frames(), zt.dim()).data();
    return LatentVideo<Scalar>(std::move(next));
}

/// The noise estimate fed to the sampler at each reverse step.
///
/// Transition modes spend the first tau steps on neutral-prompt CFG, then
/// steer with the transitional direction and apply CFG on top of the refined
/// score. Baseline modes use their own score at every step.
template <typename Scalar>
class GuidedScore {
public:
    GuidedScore(const GuidanceSpec& spec, const ConditionSet& conds, const Denoiser<Scalar>& den)
        : spec_(spec), conds_(conds), den_(den) {}

    static bool uses_warmup(GuidanceMode m) {
        return m == GuidanceMode::ours_anchored || m == GuidanceMode::naive_additive;
    }

    /// Conditions a mode reads, null included.
    static std::vector<ConditionId> required_conditions(const GuidanceSpec& spec, const ConditionSet& c) {
        switch (spec.mode) {
            case GuidanceMode::ours_anchored: return {c.initial, c.final, c.neutral, c.null};
            case GuidanceMode::naive_additive:
                return spec.tau > 0 ? std::vector{c.initial, c.final, c.neutral, c.null}
                                    : std::vector{c.initial, c.final, c.null};
            case GuidanceMode::single_prompt: return {spec.single_condition, c.null};
            case GuidanceMode::prompt_interpolation: return {c.initial, c.final, c.null};
        }
        return {};
    }

    /// `step_index` counts reverse steps taken so far: 0 at t = T.
    LatentVideo<Scalar> operator()(const LatentVideo<Scalar>& zt, Index t, Index step_index) {
        const auto omega = static_cast<Scalar>(spec_.omega);
        const auto uncond = den_.evaluate(zt, t, conds_.null);

        if (uses_warmup(spec_.mode) && step_index < spec_.tau)
            return cfg_epsilon(den_.evaluate(zt, t, conds_.neutral), uncond, omega);

        switch (spec_.mode) {
            case GuidanceMode::ours_anchored:
                return cfg_epsilon(refined_epsilon_anchored(den_.evaluate(zt, t, conds_.neutral), direction(zt, t), spec_),
                                   uncond, omega);
            case GuidanceMode::naive_additive: {
                // Direction first so eps(z_t, P_I) is not requested twice on recompute.
                auto eps_initial = den_.evaluate(zt, t, conds_.initial);
                const auto& dir = frozen_ && spec_.direction_policy == DirectionPolicy::freeze_after_tau
                                      ? *frozen_
                                      : remember(transitional_direction(eps_initial, den_.evaluate(zt, t, conds_.final),
                                                                        spec_.normalization));
                return cfg_epsilon(refined_epsilon_naive(eps_initial, dir, spec_), uncond, omega);
            }
            case GuidanceMode::single_prompt:
                return cfg_epsilon(den_.evaluate(zt, t, spec_.single_condition), uncond, omega);
            case GuidanceMode::prompt_interpolation:
                return cfg_epsilon(interpolated_condition_epsilon(zt, t, conds_.initial, conds_.final, den_), uncond,
                                   omega);
        }
        throw ConfigError("unknown guidance mode");
    }

private:
    const TransitionalDirection<Scalar>& direction(const LatentVideo<Scalar>& zt, Index t) {
        if (frozen_ && spec_.direction_policy == DirectionPolicy::freeze_after_tau) return *frozen_;
        return remember(transitional_direction(zt, t, conds_.initial, conds_.final, den_, spec_.normalization));
    }

    const TransitionalDirection<Scalar>& remember(TransitionalDirection<Scalar> dir) {
        frozen_ = std::move(dir);
        return *frozen_;
    }

    GuidanceSpec spec_;
    ConditionSet conds_;
    const Denoiser<Scalar>& den_;
    std::optional<TransitionalDirection<Scalar>> frozen_;
};

/// Full reverse-diffusion run from z_T ~ N(0, I) of shape frames x den.dim().
template <typename Scalar>
Trajectory<Scalar> sample_video(const GuidanceSpec& spec, const SamplerKind& kind, const ConditionSet& conds,
                                Index frames, const Denoiser<Scalar>& den, const NoiseSchedule<Scalar>& sched,
                                Rng& rng) {
    const Index T = sched.steps();
    spec.validate(T, frames);
    for (const auto& c : GuidedScore<Scalar>::required_conditions(spec, conds))
        if (!den.has_condition(c)) throw ConfigError("mode " + std::string(to_string(spec.mode)) + " needs condition " + c.str());
    if (spec.mode == GuidanceMode::prompt_interpolation && frames < 2)
        throw ConfigError("prompt interpolation needs at least two frames");

    GuidedScore<Scalar> score(spec, conds, den);
    Trajectory<Scalar> traj{{}, spec.mode, rng.seed()};
    std::vector<LatentVideo<Scalar>> path;
    path.reserve(static_cast<std::size_t>(T + 1));
    path.push_back(rng.normal_video<Scalar>(frames, den.dim()));
    for (Index t = T; t >= 1; --t) {
        const auto& zt = path.back();
        path.push_back(step(zt, t, score(zt, t, T - t), sched, kind, rng));
    }
    // path runs T..0; store indexed by t.
    traj.zs.assign(path.rbegin(), path.rend());
    return traj;
}

}  // namespace fader
