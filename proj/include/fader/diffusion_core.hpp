// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "fader/errors.hpp"

namespace fader {

using Index = Eigen::Index;

template <typename Scalar>
using FrameMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// An F-frame sequence of D-dimensional latents, stored one frame per row.
///
/// Every constructor rejects empty shapes and non-finite entries, so a
/// LatentVideo that exists is always a valid point in latent space.
template <typename Scalar>
class LatentVideo {
public:
    using Matrix = FrameMatrix<Scalar>;

    LatentVideo(Index frames, Index dim) : data_(Matrix::Zero(check_extent(frames), check_extent(dim))) {}

    explicit LatentVideo(Matrix data) : data_(std::move(data)) {
        check_extent(data_.rows());
        check_extent(data_.cols());
        if (!data_.allFinite()) throw NonFiniteValue("latent video contains NaN or Inf");
    }

    template <typename Derived>
    static LatentVideo from_expr(const Eigen::MatrixBase<Derived>& expr) {
        return LatentVideo(Matrix(expr));
    }

    static LatentVideo constant(Index frames, Index dim, Scalar value) {
        return LatentVideo(Matrix::Constant(check_extent(frames), check_extent(dim), value));
    }

    Index frames() const noexcept { return data_.rows(); }
    Index dim() const noexcept { return data_.cols(); }
    const Matrix& data() const noexcept { return data_; }
    auto frame(Index j) const { return data_.row(j); }

    bool same_shape(const LatentVideo& other) const noexcept {
        return frames() == other.frames() && dim() == other.dim();
    }

    friend bool operator==(const LatentVideo& a, const LatentVideo& b) {
        return a.same_shape(b) && a.data_ == b.data_;
    }

private:
    static Index check_extent(Index n) {
        if (n < 1) throw ShapeMismatch("latent video needs at least one frame and one dimension");
        return n;
    }

    Matrix data_;
};

using LatentVideod = LatentVideo<double>;

template <typename Scalar>
void require_same_shape(const LatentVideo<Scalar>& a, const LatentVideo<Scalar>& b, std::string_view what) {
    if (!a.same_shape(b)) {
        throw ShapeMismatch(std::string(what) + ": shapes " + std::to_string(a.frames()) + "x" +
                            std::to_string(a.dim()) + " and " + std::to_string(b.frames()) + "x" +
                            std::to_string(b.dim()) + " differ");
    }
}

enum class ScheduleKind { linear, scaled_linear };

inline std::string_view to_string(ScheduleKind k) {
    return k == ScheduleKind::linear ? "linear" : "scaled_linear";
}

/// Discrete variance-preserving noise schedule indexed t = 0..T.
///
/// Index 0 is the clean sample (beta 0, alpha_bar 1, sigma 0); t = 1..T are the
/// diffusion steps.
template <typename Scalar>
class NoiseSchedule {
public:
    explicit NoiseSchedule(const Vector<Scalar>& betas) {
        const Index T = betas.size();
        if (T < 1) throw InvalidScheduleParams("schedule needs at least one step");
        beta_.resize(T + 1);
        alpha_.resize(T + 1);
        alpha_bar_.resize(T + 1);
        sigma_.resize(T + 1);
        beta_(0) = Scalar(0);
        alpha_(0) = Scalar(1);
        alpha_bar_(0) = Scalar(1);
        sigma_(0) = Scalar(0);
        for (Index t = 1; t <= T; ++t) {
            const Scalar b = betas(t - 1);
            if (!(b > Scalar(0) && b < Scalar(1)))
                throw InvalidScheduleParams("beta[" + std::to_string(t) + "] outside (0, 1)");
            beta_(t) = b;
            alpha_(t) = Scalar(1) - b;
            alpha_bar_(t) = alpha_bar_(t - 1) * alpha_(t);
            sigma_(t) = std::sqrt(Scalar(1) - alpha_bar_(t));
        }
    }

    Index steps() const noexcept { return beta_.size() - 1; }

    Scalar beta(Index t) const { return beta_(check(t)); }
    Scalar alpha(Index t) const { return alpha_(check(t)); }
    Scalar alpha_bar(Index t) const { return alpha_bar_(check(t)); }
    Scalar sigma(Index t) const { return sigma_(check(t)); }

private:
    Index check(Index t) const {
        if (t < 0 || t > steps())
            throw StepOutOfRange("step " + std::to_string(t) + " outside [0, " + std::to_string(steps()) + "]");
        return t;
    }

    Vector<Scalar> beta_, alpha_, alpha_bar_, sigma_;
};

using NoiseScheduled = NoiseSchedule<double>;

struct ScheduleParams {
    Index steps = 50;
    double beta_start = 0.0;
    double beta_end = 0.0;
    ScheduleKind kind = ScheduleKind::linear;

    /// The 1000-step DDPM linear(1e-4, 0.02) betas rescaled to `steps` steps,
    /// so alpha_bar[T] lands near zero for any T.
    static ScheduleParams defaults(Index steps) {
        const double scale = 1000.0 / static_cast<double>(steps);
        return {steps, std::min(1e-4 * scale, 0.5), std::min(0.02 * scale, 0.999), ScheduleKind::linear};
    }
};

template <typename Scalar = double>
NoiseSchedule<Scalar> build_schedule(Index steps, Scalar beta_start, Scalar beta_end, ScheduleKind kind) {
    if (steps < 2) throw InvalidScheduleParams("schedule needs T >= 2, got " + std::to_string(steps));
    if (!(beta_start > Scalar(0) && beta_start <= beta_end && beta_end < Scalar(1)))
        throw InvalidScheduleParams("need 0 < beta_start <= beta_end < 1");

    Vector<Scalar> betas(steps);
    switch (kind) {
        case ScheduleKind::linear:
            betas = Vector<Scalar>::LinSpaced(steps, beta_start, beta_end);
            break;
        case ScheduleKind::scaled_linear:
            betas = Vector<Scalar>::LinSpaced(steps, std::sqrt(beta_start), std::sqrt(beta_end)).array().square();
            break;
    }
    // LinSpaced may round the last entry a hair past beta_end.
    betas = betas.cwiseMin(beta_end).cwiseMax(beta_start);
    return NoiseSchedule<Scalar>(betas);
}

template <typename Scalar = double>
NoiseSchedule<Scalar> build_schedule(const ScheduleParams& p) {
    return build_schedule<Scalar>(p.steps, Scalar(p.beta_start), Scalar(p.beta_end), p.kind);
}

/// Forward corruption z_t = sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) eps.
/// t = 0 is accepted and returns z0.
template <typename Scalar>
LatentVideo<Scalar> q_sample(const LatentVideo<Scalar>& z0, Index t, const LatentVideo<Scalar>& eps,
                             const NoiseSchedule<Scalar>& sched) {
    require_same_shape(z0, eps, "q_sample");
    const Scalar ab = sched.alpha_bar(t);
    if (ab == Scalar(1)) return z0;
    return LatentVideo<Scalar>::from_expr(std::sqrt(ab) * z0.data() + std::sqrt(Scalar(1) - ab) * eps.data());
}

/// splitmix64 finaliser; used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a, 64 bit. Stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Per-trajectory Gaussian noise source. Equal seeds and equal call sequences
/// give bit-identical draws. Not shared between threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    double normal() { return dist_(engine_); }

    template <typename Scalar = double>
    LatentVideo<Scalar> normal_video(Index frames, Index dim) {
        FrameMatrix<Scalar> m(frames, dim);
        for (Index j = 0; j < frames; ++j)
            for (Index i = 0; i < dim; ++i) m(j, i) = static_cast<Scalar>(normal());
        return LatentVideo<Scalar>(std::move(m));
    }

    /// Child seed for a keyed sub-stream.
    static std::uint64_t split(std::uint64_t seed, std::uint64_t key) noexcept {
        return mix64(mix64(seed) ^ mix64(key + 0x632be59bd9b4e019ULL));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace fader
