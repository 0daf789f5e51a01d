#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cursal/core/metrics.hpp"
#include "cursal/core/types.hpp"

namespace cursal {

/// Coefficients of the semiautomatic transform. window_k and decay drive
/// fixation propagation; the rest shape each frame as
///   out = alpha * (s / max s)^gamma + beta * center_prior.
struct PostprocessParams {
    int window_k = 2;
    double decay = 0.8;
    double gamma = 1.0;
    double alpha = 1.0;
    double beta = 0.0;
    double center_sigma_frac = 0.25;

    void validate() const {
        if (window_k < 0) throw ParameterError("window_k must be non-negative");
        if (!(decay > 0.0 && decay <= 1.0)) throw ParameterError("decay must be in (0, 1]");
        if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must be in [0, 1]");
        if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("beta must be in [0, 1]");
        if (!(alpha + beta > 0.0)) throw ParameterError("alpha + beta must be positive");
        if (!(center_sigma_frac > 0.0) || !std::isfinite(center_sigma_frac)) {
            throw ParameterError("center_sigma_frac must be positive");
        }
    }

    friend bool operator==(const PostprocessParams&, const PostprocessParams&) = default;
};

/// Unit-peak Gaussian centered on the frame, sigma = sigma_frac * width.
inline SaliencyFrame center_prior(int width, int height, double sigma_frac) {
    SaliencyFrame cp(width, height);
    const double sigma = sigma_frac * width;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const double cx = width / 2.0, cy = height / 2.0;
    for (int y = 0; y < height; ++y) {
        const double dy = (y + 0.5) - cy;
        for (int x = 0; x < width; ++x) {
            const double dx = (x + 0.5) - cx;
            cp.at(x, y) = std::exp(-(dx * dx + dy * dy) * inv2s2);
        }
    }
    return cp;
}

/// Peak-normalized map raised to `gamma`. All-zero frames stay zero.
inline SaliencyFrame brightness_correct(const SaliencyFrame& f, double gamma) {
    SaliencyFrame out(f.width, f.height);
    const double peak = f.data.empty() ? 0.0 : *std::max_element(f.data.begin(), f.data.end());
    if (!(peak > 0.0)) return out;
    for (std::size_t i = 0; i < f.data.size(); ++i) out.data[i] = std::pow(f.data[i] / peak, gamma);
    return out;
}

namespace detail {

inline SaliencyFrame combine(const SaliencyFrame& corrected, const SaliencyFrame& prior, double alpha,
                             double beta) {
    SaliencyFrame out(corrected.width, corrected.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = alpha * corrected.data[i] + beta * prior.data[i];
    }
    return out;
}

} // namespace detail

inline SaliencyVideo apply_postprocess(const SaliencyVideo& sm, const PostprocessParams& params) {
    params.validate();
    SaliencyVideo out;
    out.video_id = sm.video_id;
    out.fps = sm.fps;
    out.frames.reserve(sm.frames.size());
    std::map<std::pair<int, int>, SaliencyFrame> priors;
    for (const auto& f : sm.frames) {
        validate(f);
        auto it = priors.find({f.width, f.height});
        if (it == priors.end()) {
            it = priors.emplace(std::make_pair(f.width, f.height),
                                center_prior(f.width, f.height, params.center_sigma_frac)).first;
        }
        out.frames.push_back(detail::combine(brightness_correct(f, params.gamma), it->second, params.alpha,
                                             params.beta));
    }
    return out;
}

/// Values tried per coefficient. Search order is gamma, alpha, beta,
/// center_sigma_frac, each ascending as listed; combinations with
/// alpha + beta = 0 are skipped.
struct ParamGrid {
    std::vector<double> gamma{0.5, 0.75, 1.0, 1.5, 2.0};
    std::vector<double> alpha{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> beta{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> center_sigma_frac{0.15, 0.25, 0.35};
};

struct FitResult {
    PostprocessParams params;
    double sim = 0.0;
    int evaluated = 0;
};

namespace detail {

// Mean video similarity with the convention that a video whose prediction
// is empty on every frame scores 0.
inline double scored_similarity(const SaliencyVideo& pred, const SaliencyVideo& truth) {
    try {
        return video_similarity(pred, truth).mean;
    } catch (const UndefinedMetricError&) {
        return 0.0;
    }
}

} // namespace detail

/// Training-set score of one parameter set, as maximized by fit_postprocess.
inline double postprocess_score(std::span<const SaliencyVideo> inputs, std::span<const SaliencyVideo> truths,
                                const PostprocessParams& params) {
    double sum = 0.0;
    int used = 0;
    for (std::size_t v = 0; v < inputs.size(); ++v) {
        if (!std::any_of(truths[v].frames.begin(), truths[v].frames.end(), has_mass)) continue;
        sum += detail::scored_similarity(apply_postprocess(inputs[v], params), truths[v]);
        ++used;
    }
    if (used == 0) throw ParameterError("no training video has ground-truth mass");
    return sum / used;
}

/// Exhaustive grid search for the coefficients maximizing mean training
/// similarity. The first best in search order wins. `base` supplies the
/// propagation settings, which are carried through unchanged.
inline FitResult fit_postprocess(std::span<const SaliencyVideo> inputs, std::span<const SaliencyVideo> truths,
                                 const ParamGrid& grid = {}, const PostprocessParams& base = {}) {
    if (inputs.empty()) throw ParameterError("empty training set");
    if (inputs.size() != truths.size()) throw ShapeError("inputs and truths differ in count");
    if (grid.gamma.empty() || grid.alpha.empty() || grid.beta.empty() || grid.center_sigma_frac.empty()) {
        throw ParameterError("every grid axis needs at least one value");
    }
    std::vector<std::size_t> videos;
    for (std::size_t v = 0; v < inputs.size(); ++v) {
        if (inputs[v].frames.size() != truths[v].frames.size()) {
            throw ShapeError("training pair " + std::to_string(v) + " differs in frame count");
        }
        for (std::size_t f = 0; f < inputs[v].frames.size(); ++f) {
            validate(inputs[v].frames[f]);
            validate(truths[v].frames[f]);
            if (!inputs[v].frames[f].same_shape(truths[v].frames[f])) {
                throw ShapeError("training pair " + std::to_string(v) + " differs in frame size");
            }
        }
        if (std::any_of(truths[v].frames.begin(), truths[v].frames.end(), has_mass)) videos.push_back(v);
    }
    if (videos.empty()) throw ParameterError("no training video has ground-truth mass");

    // Brightness-corrected inputs per gamma and priors per sigma are shared
    // across the alpha/beta sweep; combine() matches apply_postprocess exactly.
    std::map<std::pair<int, int>, std::vector<SaliencyFrame>> priors;
    for (std::size_t v : videos) {
        for (const auto& f : inputs[v].frames) {
            auto& p = priors[{f.width, f.height}];
            if (!p.empty()) continue;
            for (double s : grid.center_sigma_frac) p.push_back(center_prior(f.width, f.height, s));
        }
    }

    FitResult best;
    best.sim = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (double gamma : grid.gamma) {
        std::vector<std::vector<SaliencyFrame>> corrected;
        for (std::size_t v : videos) {
            std::vector<SaliencyFrame> frames;
            for (const auto& f : inputs[v].frames) frames.push_back(brightness_correct(f, gamma));
            corrected.push_back(std::move(frames));
        }
        for (double alpha : grid.alpha) {
            for (double beta : grid.beta) {
                if (!(alpha + beta > 0.0)) continue;
                for (std::size_t si = 0; si < grid.center_sigma_frac.size(); ++si) {
                    PostprocessParams p = base;
                    p.gamma = gamma;
                    p.alpha = alpha;
                    p.beta = beta;
                    p.center_sigma_frac = grid.center_sigma_frac[si];
                    p.validate();

                    double sum = 0.0;
                    for (std::size_t k = 0; k < videos.size(); ++k) {
                        const SaliencyVideo& truth = truths[videos[k]];
                        SaliencyVideo pred;
                        pred.frames.reserve(corrected[k].size());
                        for (const auto& c : corrected[k]) {
                            pred.frames.push_back(detail::combine(c, priors[{c.width, c.height}][si], alpha, beta));
                        }
                        sum += detail::scored_similarity(pred, truth);
                    }
                    const double score = sum / static_cast<double>(videos.size());
                    ++best.evaluated;
                    if (!found || score > best.sim) {
                        found = true;
                        best.sim = score;
                        best.params = p;
                    }
                    // beta = 0 makes the prior width irrelevant.
                    if (beta == 0.0) break;
                }
            }
        }
    }
    if (!found) throw ParameterError("grid has no admissible parameter combination");
    return best;
}

} // namespace cursal
