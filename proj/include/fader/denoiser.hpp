// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fader/diffusion_core.hpp"

namespace fader {

enum class ConditionRole { initial, final, neutral, null, custom };

/// Opaque prompt handle. Built-in roles stand for P_I, P_F, P_N and the
/// unconditional prompt; `custom` carries a name.
struct ConditionId {
    ConditionRole role = ConditionRole::null;
    std::string name;

    static ConditionId initial() { return {ConditionRole::initial, {}}; }
    static ConditionId final() { return {ConditionRole::final, {}}; }
    static ConditionId neutral() { return {ConditionRole::neutral, {}}; }
    static ConditionId null() { return {ConditionRole::null, {}}; }
    static ConditionId custom(std::string n) { return {ConditionRole::custom, std::move(n)}; }

    std::string str() const {
        switch (role) {
            case ConditionRole::initial: return "initial";
            case ConditionRole::final: return "final";
            case ConditionRole::neutral: return "neutral";
            case ConditionRole::null: return "null";
            case ConditionRole::custom: return "custom:" + name;
        }
        return {};
    }

    auto operator<=>(const ConditionId&) const = default;
};

/// Diagonal Gaussian p(z0 | c) = N(mean, diag(var)), applied to every frame.
template <typename Scalar>
struct GaussianCondition {
    Vector<Scalar> mean;
    Vector<Scalar> var;

    Index dim() const noexcept { return mean.size(); }

    void validate(Index expected_dim) const {
        if (mean.size() != expected_dim || var.size() != expected_dim)
            throw DimMismatch("condition has dim " + std::to_string(mean.size()) + "/" + std::to_string(var.size()) +
                              ", expected " + std::to_string(expected_dim));
        if (!(var.array() > Scalar(0)).all()) throw NonPositiveVariance("condition variance must be > 0");
        if (!mean.allFinite() || !var.allFinite()) throw NonFiniteValue("condition parameters must be finite");
    }

    static GaussianCondition isotropic(Index dim, Scalar mean, Scalar var) {
        return {Vector<Scalar>::Constant(dim, mean), Vector<Scalar>::Constant(dim, var)};
    }
};

using GaussianConditiond = GaussianCondition<double>;

template <typename Scalar>
struct MixtureComponent {
    Scalar weight;
    GaussianCondition<Scalar> condition;
};

/// Exact noise prediction for a Gaussian data distribution:
///   eps = sigma_t (z - sqrt(ab) mu) / (ab s^2 + 1 - ab)
/// which is -sigma_t times the score of p(z_t | c).
template <typename Scalar>
LatentVideo<Scalar> analytic_epsilon(const LatentVideo<Scalar>& zt, Index t, const GaussianCondition<Scalar>& c,
                                     const NoiseSchedule<Scalar>& sched) {
    c.validate(zt.dim());
    if (t < 1 || t > sched.steps()) throw StepOutOfRange("analytic_epsilon: t outside [1, T]");
    const Scalar ab = sched.alpha_bar(t);
    const Scalar sigma = sched.sigma(t);
    const Vector<Scalar> center = std::sqrt(ab) * c.mean;
    const Vector<Scalar> marginal_var = (ab * c.var.array() + (Scalar(1) - ab)).matrix();

    FrameMatrix<Scalar> eps = zt.data().rowwise() - center.transpose();
    eps.array().rowwise() /= marginal_var.transpose().array();
    return LatentVideo<Scalar>(sigma * eps);
}

/// Exact noise prediction for a Gaussian-mixture marginal, frame by frame,
/// with log-sum-exp stabilised responsibilities.
template <typename Scalar>
LatentVideo<Scalar> null_condition_epsilon(const LatentVideo<Scalar>& zt, Index t,
                                           std::span<const MixtureComponent<Scalar>> mixture,
                                           const NoiseSchedule<Scalar>& sched) {
    if (mixture.empty()) throw EmptyMixture("null condition mixture has no components");
    Scalar total = 0;
    for (const auto& m : mixture) {
        if (!(m.weight > Scalar(0))) throw WeightsNotNormalized("mixture weights must be positive");
        m.condition.validate(zt.dim());
        total += m.weight;
    }
    if (std::abs(total - Scalar(1)) > Scalar(1e-9)) throw WeightsNotNormalized("mixture weights must sum to 1");
    if (t < 1 || t > sched.steps()) throw StepOutOfRange("null_condition_epsilon: t outside [1, T]");

    const Scalar ab = sched.alpha_bar(t);
    const Scalar sigma = sched.sigma(t);
    const auto K = static_cast<Index>(mixture.size());
    const Index D = zt.dim();

    // Per component: center, marginal variance, and the z-independent part of the log density.
    FrameMatrix<Scalar> centers(K, D), vars(K, D);
    Vector<Scalar> log_const(K);
    for (Index k = 0; k < K; ++k) {
        const auto& comp = mixture[static_cast<std::size_t>(k)];
        centers.row(k) = std::sqrt(ab) * comp.condition.mean.transpose();
        vars.row(k) = (ab * comp.condition.var.array() + (Scalar(1) - ab)).transpose();
        log_const(k) = std::log(comp.weight) - Scalar(0.5) * vars.row(k).array().log().sum();
    }

    FrameMatrix<Scalar> eps(zt.frames(), D);
    Vector<Scalar> log_resp(K);
    for (Index j = 0; j < zt.frames(); ++j) {
        const auto z = zt.frame(j);
        for (Index k = 0; k < K; ++k)
            log_resp(k) = log_const(k) - Scalar(0.5) * ((z - centers.row(k)).array().square() / vars.row(k).array()).sum();
        const Scalar top = log_resp.maxCoeff();
        const Vector<Scalar> resp = (log_resp.array() - top).exp().matrix();
        const Scalar norm = resp.sum();

        eps.row(j).setZero();
        for (Index k = 0; k < K; ++k)
            eps.row(j).array() += (resp(k) / norm) * (z - centers.row(k)).array() / vars.row(k).array();
    }
    return LatentVideo<Scalar>(sigma * eps);
}

/// eps_theta(z_t, c). Implementations are pure: same (zt, t, c) gives the
/// same output, and the output has the shape of zt.
template <typename Scalar>
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual LatentVideo<Scalar> evaluate(const LatentVideo<Scalar>& zt, Index t, const ConditionId& c) const = 0;
    virtual bool has_condition(const ConditionId& c) const = 0;
    virtual Index dim() const = 0;
};

/// Ground-truth denoiser over Gaussian conditionals.
///
/// The null condition resolves to a Gaussian mixture: by default the
/// equal-weight mixture of every registered condition, i.e. the marginal
/// over prompts.
template <typename Scalar>
class AnalyticDenoiser final : public Denoiser<Scalar> {
public:
    AnalyticDenoiser(NoiseSchedule<Scalar> sched, Index dim) : sched_(std::move(sched)), dim_(dim) {
        if (dim < 1) throw DimMismatch("denoiser dim must be >= 1");
    }

    AnalyticDenoiser& add_condition(const ConditionId& id, GaussianCondition<Scalar> c) {
        if (id.role == ConditionRole::null) throw ConfigError("null condition is defined by its mixture");
        c.validate(dim_);
        conditions_.insert_or_assign(id, std::move(c));
        if (!explicit_null_) rebuild_default_null();
        return *this;
    }

    /// Replace the default marginal with an explicit mixture over registered conditions.
    AnalyticDenoiser& set_null_mixture(const std::vector<std::pair<ConditionId, Scalar>>& weights) {
        std::vector<MixtureComponent<Scalar>> mix;
        for (const auto& [id, w] : weights) mix.push_back({w, lookup(id)});
        null_ = std::move(mix);
        explicit_null_ = true;
        return *this;
    }

    LatentVideo<Scalar> evaluate(const LatentVideo<Scalar>& zt, Index t, const ConditionId& c) const override {
        if (zt.dim() != dim_) throw DimMismatch("latent dim does not match denoiser");
        if (c.role == ConditionRole::null)
            return null_condition_epsilon<Scalar>(zt, t, std::span<const MixtureComponent<Scalar>>(null_), sched_);
        return analytic_epsilon(zt, t, lookup(c), sched_);
    }

    bool has_condition(const ConditionId& c) const override {
        return c.role == ConditionRole::null ? !null_.empty() : conditions_.contains(c);
    }

    Index dim() const override { return dim_; }

    const GaussianCondition<Scalar>& lookup(const ConditionId& c) const {
        auto it = conditions_.find(c);
        if (it == conditions_.end()) throw UnknownCondition("no condition registered for " + c.str());
        return it->second;
    }

    const std::vector<MixtureComponent<Scalar>>& null_mixture() const noexcept { return null_; }
    const NoiseSchedule<Scalar>& schedule() const noexcept { return sched_; }

private:
    void rebuild_default_null() {
        null_.clear();
        const Scalar w = Scalar(1) / static_cast<Scalar>(conditions_.size());
        for (const auto& [id, c] : conditions_) null_.push_back({w, c});
    }

    NoiseSchedule<Scalar> sched_;
    Index dim_;
    std::map<ConditionId, GaussianCondition<Scalar>> conditions_;
    std::vector<MixtureComponent<Scalar>> null_;
    bool explicit_null_ = false;
};

}  // namespace fader
