// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fader/denoiser.hpp"

namespace fader {

enum class GuidanceMode { ours_anchored, naive_additive, single_prompt, prompt_interpolation };

/// How the transitional direction is normalised: once over the whole video,
/// or each frame on its own (ablation).
enum class DirectionNorm { global, per_frame };

enum class DirectionPolicy { recompute, freeze_after_tau };

/// Which half of the video a frame offset is measured into, relative to the middle frame.
enum class FrameSide { preceding, following };

std::string_view to_string(GuidanceMode m);
GuidanceMode parse_guidance_mode(std::string_view s);
std::string_view to_string(DirectionNorm n);
DirectionNorm parse_direction_norm(std::string_view s);
std::string_view to_string(DirectionPolicy p);
DirectionPolicy parse_direction_policy(std::string_view s);

struct GuidanceSpec {
    double omega = 12.0;
    Index tau = 5;
    double alpha_max = 1.0;
    std::optional<Index> middle_frame;  // defaults to F / 2
    GuidanceMode mode = GuidanceMode::ours_anchored;
    DirectionNorm normalization = DirectionNorm::global;
    DirectionPolicy direction_policy = DirectionPolicy::recompute;
    ConditionId single_condition = ConditionId::final();

    Index middle(Index frames) const { return middle_frame.value_or(frames / 2); }

    void validate(Index steps, Index frames) const {
        if (!(omega >= 0.0)) throw ConfigError("omega must be >= 0");
        if (!(alpha_max >= 0.0)) throw ConfigError("alpha_max must be >= 0");
        if (tau < 0 || tau > steps) throw ConfigError("tau must lie in [0, T]");
        const Index m = middle(frames);
        if (m < 0 || m > frames - 1) throw ConfigError("middle frame must lie in [0, F-1]");
    }
};

/// Unit-norm steering field over the whole video, plus the norm it was scaled by.
template <typename Scalar>
struct TransitionalDirection {
    FrameMatrix<Scalar> data;
    Scalar raw_norm;
};

/// (1 + omega) eps_cond - omega eps_uncond, written as eps_cond + omega (eps_cond - eps_uncond)
/// so omega = 0 and eps_cond == eps_uncond both return eps_cond exactly.
template <typename Scalar>
LatentVideo<Scalar> cfg_epsilon(const LatentVideo<Scalar>& eps_cond, const LatentVideo<Scalar>& eps_uncond,
                                Scalar omega) {
    require_same_shape(eps_cond, eps_uncond, "cfg_epsilon");
    return LatentVideo<Scalar>::from_expr(eps_cond.data() + omega * (eps_cond.data() - eps_uncond.data()));
}

template <typename Scalar>
TransitionalDirection<Scalar> transitional_direction(const LatentVideo<Scalar>& eps_initial,
                                                     const LatentVideo<Scalar>& eps_final,
                                                     DirectionNorm norm = DirectionNorm::global) {
    require_same_shape(eps_initial, eps_final, "transitional_direction");
    constexpr Scalar tiny = Scalar(1e-12);
    FrameMatrix<Scalar> delta = eps_final.data() - eps_initial.data();
    const Scalar raw = delta.norm();
    if (!(raw >= tiny)) throw DegenerateDirection("initial and final scores coincide (|delta| < 1e-12)");

    if (norm == DirectionNorm::global) {
        delta /= raw;
    } else {
        for (Index j = 0; j < delta.rows(); ++j) {
            const Scalar n = delta.row(j).norm();
            if (!(n >= tiny))
                throw DegenerateDirection("frame " + std::to_string(j) + " has a degenerate direction");
            delta.row(j) /= n;
        }
    }
    return {std::move(delta), raw};
}

/// Unit direction from eps(z_t, P_I) toward eps(z_t, P_F), from two denoiser calls.
template <typename Scalar>
TransitionalDirection<Scalar> transitional_direction(const LatentVideo<Scalar>& zt, Index t, const ConditionId& initial,
                                                     const ConditionId& final, const Denoiser<Scalar>& den,
                                                     DirectionNorm norm = DirectionNorm::global) {
    if (initial == final) throw DegenerateDirection("initial and final conditions are the same prompt");
    return transitional_direction(den.evaluate(zt, t, initial), den.evaluate(zt, t, final), norm);
}

/// Scale for a frame k steps away from the middle frame. Each half ramps
/// linearly from 0 at the middle to alpha_max at its end frame.
inline double alpha_at(Index k, FrameSide side, const GuidanceSpec& spec, Index frames) {
    const Index m = spec.middle(frames);
    const Index extent = side == FrameSide::preceding ? m : frames - 1 - m;
    if (k < 0 || k > extent)
        throw ConfigError("frame offset " + std::to_string(k) + " outside [0, " + std::to_string(extent) + "]");
    if (k == 0) return 0.0;
    return spec.alpha_max * static_cast<double>(k) / static_cast<double>(extent);
}

/// Signed per-frame multipliers of the direction in anchored mode:
/// -alpha before the middle frame, 0 at it, +alpha after it.
inline std::vector<double> anchored_coefficients(const GuidanceSpec& spec, Index frames) {
    const Index m = spec.middle(frames);
    std::vector<double> coeff(static_cast<std::size_t>(frames), 0.0);
    for (Index j = 0; j < frames; ++j) {
        if (j < m) coeff[static_cast<std::size_t>(j)] = -alpha_at(m - j, FrameSide::preceding, spec, frames);
        if (j > m) coeff[static_cast<std::size_t>(j)] = alpha_at(j - m, FrameSide::following, spec, frames);
    }
    return coeff;
}

/// Naive-mode multipliers: 0 at frame 0 rising to alpha_max at frame F-1.
inline std::vector<double> naive_coefficients(const GuidanceSpec& spec, Index frames) {
    std::vector<double> coeff(static_cast<std::size_t>(frames), 0.0);
    if (frames < 2) return coeff;
    for (Index j = 1; j < frames; ++j)
        coeff[static_cast<std::size_t>(j)] = spec.alpha_max * static_cast<double>(j) / static_cast<double>(frames - 1);
    return coeff;
}

namespace detail {

// base[j] + coeff[j] * dir[j]; frames with a zero coefficient are copied untouched.
template <typename Scalar>
LatentVideo<Scalar> add_scaled_direction(const LatentVideo<Scalar>& base, const TransitionalDirection<Scalar>& dir,
                                         std::span<const double> coeff, std::string_view what) {
    if (dir.data.rows() != base.frames() || dir.data.cols() != base.dim())
        throw ShapeMismatch(std::string(what) + ": direction shape differs from score shape");
    if (static_cast<Index>(coeff.size()) != base.frames())
        throw ShapeMismatch(std::string(what) + ": one scale per frame required");
    FrameMatrix<Scalar> out = base.data();
    for (Index j = 0; j < base.frames(); ++j) {
        const auto a = static_cast<Scalar>(coeff[static_cast<std::size_t>(j)]);
        if (a != Scalar(0)) out.row(j) += a * dir.data.row(j);
    }
    return LatentVideo<Scalar>(std::move(out));
}

}  // namespace detail

/// eps_I[j] + alpha_j dir[j] with explicit per-frame scales.
template <typename Scalar>
LatentVideo<Scalar> refined_epsilon_naive(const LatentVideo<Scalar>& eps_initial,
                                          const TransitionalDirection<Scalar>& dir, std::span<const double> scales) {
    return detail::add_scaled_direction(eps_initial, dir, scales, "refined_epsilon_naive");
}

template <typename Scalar>
LatentVideo<Scalar> refined_epsilon_naive(const LatentVideo<Scalar>& eps_initial,
                                          const TransitionalDirection<Scalar>& dir, const GuidanceSpec& spec) {
    const auto coeff = naive_coefficients(spec, eps_initial.frames());
    return refined_epsilon_naive(eps_initial, dir, std::span<const double>(coeff));
}

/// Neutral score pushed against the direction before the middle frame and
/// along it after; the middle frame is the neutral score itself.
template <typename Scalar>
LatentVideo<Scalar> refined_epsilon_anchored(const LatentVideo<Scalar>& eps_neutral,
                                             const TransitionalDirection<Scalar>& dir, const GuidanceSpec& spec) {
    const Index m = spec.middle(eps_neutral.frames());
    if (m < 0 || m > eps_neutral.frames() - 1) throw ConfigError("middle frame must lie in [0, F-1]");
    const auto coeff = anchored_coefficients(spec, eps_neutral.frames());
    return detail::add_scaled_direction(eps_neutral, dir, std::span<const double>(coeff), "refined_epsilon_anchored");
}

/// Per-frame convex blend (1 - l_j) eps_I + l_j eps_F with l_j = j / (F - 1).
template <typename Scalar>
LatentVideo<Scalar> interpolated_epsilon(const LatentVideo<Scalar>& eps_initial, const LatentVideo<Scalar>& eps_final) {
    require_same_shape(eps_initial, eps_final, "interpolated_epsilon");
    const Index frames = eps_initial.frames();
    if (frames < 2) throw ShapeMismatch("prompt interpolation needs at least two frames");
    FrameMatrix<Scalar> out(frames, eps_initial.dim());
    for (Index j = 0; j < frames; ++j) {
        const Scalar lambda = static_cast<Scalar>(j) / static_cast<Scalar>(frames - 1);
        out.row(j) = (Scalar(1) - lambda) * eps_initial.frame(j) + lambda * eps_final.frame(j);
    }
    return LatentVideo<Scalar>(std::move(out));
}

template <typename Scalar>
LatentVideo<Scalar> interpolated_condition_epsilon(const LatentVideo<Scalar>& zt, Index t, const ConditionId& initial,
                                                   const ConditionId& final, const Denoiser<Scalar>& den) {
    return interpolated_epsilon(den.evaluate(zt, t, initial), den.evaluate(zt, t, final));
}

}  // namespace fader
