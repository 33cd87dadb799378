// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "fader/denoiser.hpp"

namespace fader {

/// Frame and prompt encoders sharing one embedding space of dimension dim().
template <typename Scalar>
class Embedder {
public:
    virtual ~Embedder() = default;

    virtual Vector<Scalar> embed_frame(const Vector<Scalar>& frame) const = 0;
    virtual Vector<Scalar> embed_condition(const ConditionId& c) const = 0;
    virtual Index dim() const = 0;
};

/// Linear stand-in for an image/text encoder pair: frames map through an
/// E x D projection and each condition embeds as projection * mean.
template <typename Scalar>
class ToyLinearEmbedder final : public Embedder<Scalar> {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    ToyLinearEmbedder(Matrix projection, std::map<ConditionId, Vector<Scalar>> condition_means)
        : projection_(std::move(projection)), means_(std::move(condition_means)) {
        if (projection_.rows() < 1 || projection_.cols() < 1) throw ConfigError("embedder projection is empty");
        Eigen::FullPivLU<Matrix> lu(projection_);
        if (lu.rank() != projection_.rows()) throw ConfigError("embedder projection must have full row rank");
        for (const auto& [id, mu] : means_)
            if (mu.size() != projection_.cols()) throw DimMismatch("condition mean " + id.str() + " has wrong dim");
    }

    static ToyLinearEmbedder identity(Index dim, std::map<ConditionId, Vector<Scalar>> condition_means) {
        return ToyLinearEmbedder(Matrix::Identity(dim, dim), std::move(condition_means));
    }

    Vector<Scalar> embed_frame(const Vector<Scalar>& frame) const override {
        if (frame.size() != projection_.cols()) throw DimMismatch("frame dim does not match embedder");
        return projection_ * frame;
    }

    Vector<Scalar> embed_condition(const ConditionId& c) const override {
        auto it = means_.find(c);
        if (it == means_.end()) throw UnknownCondition("embedder has no entry for " + c.str());
        return projection_ * it->second;
    }

    Index dim() const override { return projection_.rows(); }
    const Matrix& projection() const noexcept { return projection_; }

private:
    Matrix projection_;
    std::map<ConditionId, Vector<Scalar>> means_;
};

inline constexpr double kZeroVectorNorm = 1e-12;

/// Cosine of two difference vectors, clamped to [-1, 1].
template <typename Scalar>
Scalar directional_similarity(const Vector<Scalar>& v_img, const Vector<Scalar>& v_txt) {
    if (v_img.size() != v_txt.size()) throw DimMismatch("directional_similarity: dims differ");
    const Scalar ni = v_img.norm();
    const Scalar nt = v_txt.norm();
    if (!(ni >= Scalar(kZeroVectorNorm)) || !(nt >= Scalar(kZeroVectorNorm)))
        throw ZeroVector("directional_similarity: zero-length direction");
    return std::clamp(v_img.dot(v_txt) / (ni * nt), Scalar(-1), Scalar(1));
}

template <typename Scalar>
Vector<Scalar> text_direction(const ConditionId& initial, const ConditionId& final, const Embedder<Scalar>& emb) {
    return emb.embed_condition(final) - emb.embed_condition(initial);
}

/// Cosine between (last frame - first frame) and (final prompt - initial prompt) embeddings.
template <typename Scalar>
Scalar wholistic_score(const LatentVideo<Scalar>& video, const ConditionId& initial, const ConditionId& final,
                       const Embedder<Scalar>& emb) {
    if (video.frames() < 2) throw ShapeMismatch("wholistic_score needs at least two frames");
    const Vector<Scalar> first = video.frame(0).transpose();
    const Vector<Scalar> last = video.frame(video.frames() - 1).transpose();
    return directional_similarity<Scalar>(emb.embed_frame(last) - emb.embed_frame(first),
                                          text_direction(initial, final, emb));
}

template <typename Scalar>
struct FramewiseResult {
    Scalar score;
    std::vector<Scalar> per_step;    // F - 1 cosines
    std::vector<bool> static_pair;   // pairs with no image change; they score 0
    Index static_pair_count = 0;
};

/// Mean cosine between each consecutive frame-embedding step and the prompt direction.
template <typename Scalar>
FramewiseResult<Scalar> framewise_score(const LatentVideo<Scalar>& video, const ConditionId& initial,
                                        const ConditionId& final, const Embedder<Scalar>& emb) {
    const Index F = video.frames();
    if (F < 2) throw ShapeMismatch("framewise_score needs at least two frames");
    const Vector<Scalar> text = text_direction(initial, final, emb);
    if (!(text.norm() >= Scalar(kZeroVectorNorm))) throw ZeroVector("framewise_score: prompt direction is zero");

    FramewiseResult<Scalar> out{Scalar(0), {}, {}, 0};
    out.per_step.reserve(static_cast<std::size_t>(F - 1));
    out.static_pair.reserve(static_cast<std::size_t>(F - 1));
    Vector<Scalar> prev = emb.embed_frame(video.frame(0).transpose());
    Scalar sum = 0;
    for (Index i = 1; i < F; ++i) {
        Vector<Scalar> cur = emb.embed_frame(video.frame(i).transpose());
        const Vector<Scalar> diff = cur - prev;
        const bool is_static = !(diff.norm() >= Scalar(kZeroVectorNorm));
        const Scalar c = is_static ? Scalar(0) : directional_similarity<Scalar>(diff, text);
        out.per_step.push_back(c);
        out.static_pair.push_back(is_static);
        out.static_pair_count += is_static ? 1 : 0;
        sum += c;
        prev = std::move(cur);
    }
    out.score = sum / static_cast<Scalar>(F - 1);
    return out;
}

/// Per-frame position along the unit prompt direction: <embed(frame), u>.
template <typename Scalar>
Vector<Scalar> attribute_profile(const LatentVideo<Scalar>& video, const ConditionId& initial, const ConditionId& final,
                                 const Embedder<Scalar>& emb) {
    Vector<Scalar> u = text_direction(initial, final, emb);
    const Scalar n = u.norm();
    if (!(n >= Scalar(kZeroVectorNorm))) throw ZeroVector("attribute_profile: prompt direction is zero");
    u /= n;
    Vector<Scalar> out(video.frames());
    for (Index j = 0; j < video.frames(); ++j) out(j) = emb.embed_frame(video.frame(j).transpose()).dot(u);
    return out;
}

struct TransitionReport {
    std::string scenario;
    std::uint64_t seed = 0;
    double wholistic = 0;
    double framewise = 0;
    std::vector<double> per_step_cosines;
    Index static_pair_count = 0;
};

template <typename Scalar>
TransitionReport transition_report(const LatentVideo<Scalar>& video, const ConditionId& initial,
                                   const ConditionId& final, const Embedder<Scalar>& emb, std::string scenario,
                                   std::uint64_t seed) {
    TransitionReport r;
    r.scenario = std::move(scenario);
    r.seed = seed;
    r.wholistic = static_cast<double>(wholistic_score(video, initial, final, emb));
    auto fw = framewise_score(video, initial, final, emb);
    r.framewise = static_cast<double>(fw.score);
    r.per_step_cosines.assign(fw.per_step.begin(), fw.per_step.end());
    r.static_pair_count = fw.static_pair_count;
    return r;
}

}  // namespace fader
