#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cursal/core/metrics.hpp"
#include "cursal/core/random.hpp"
#include "cursal/core/raster.hpp"

namespace cursal {

/// observer id -> that observer's traces (at most one per video).
using ObserverTraces = std::map<std::string, std::vector<FixationTrace>>;
/// video id -> geometry/timing.
using VideoIndex = std::map<std::string, VideoMeta>;

struct CurvePoint {
    int n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    int resamples = 0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

namespace detail {

inline std::vector<FixationTrace> pooled_traces(const ObserverTraces& by_observer,
                                                const std::vector<std::string>& observers,
                                                const std::string& video_id) {
    std::vector<FixationTrace> out;
    for (const auto& obs : observers) {
        const auto it = by_observer.find(obs);
        if (it == by_observer.end()) continue;
        for (const auto& t : it->second) {
            if (t.video_id == video_id) out.push_back(t);
        }
    }
    return out;
}

inline bool any_samples(const std::vector<FixationTrace>& traces) {
    for (const auto& t : traces) {
        if (!t.samples.empty()) return true;
    }
    return false;
}

} // namespace detail

/// Quality of N pooled candidate observers against a ground-truth pool, as a
/// function of N.
///
/// For each N and each resample, N candidates are drawn without replacement;
/// the truth pool is every ground-truth observer not drawn. With disjoint
/// sets that is the whole truth set; when both sets are the same observers it
/// is the remaining M - N (self-holdout). The score of one resample is the
/// mean over videos of video_similarity, skipping videos where either side has
/// no usable frame. Reported mean and population stddev are over resamples.
/// Draws come from a single generator seeded with `seed` and consumed in
/// (N, resample) order.
inline std::vector<CurvePoint> subsample_curve(const ObserverTraces& candidates,
                                               const ObserverTraces& truth, const VideoIndex& videos,
                                               std::span<const int> n_values, int n_resamples,
                                               std::uint64_t seed, const RasterParams& params = {}) {
    params.validate();
    if (n_resamples < 1) throw ParameterError("n_resamples must be at least 1");
    if (candidates.empty()) throw ParameterError("no candidate observers");
    if (truth.empty()) throw ParameterError("no ground-truth observers");
    for (const auto& [id, meta] : videos) validate(meta);

    std::vector<std::string> cand_ids;
    for (const auto& [id, _] : candidates) cand_ids.push_back(id);
    std::size_t overlap = 0;
    for (const auto& [id, _] : truth) overlap += candidates.count(id);

    for (int n : n_values) {
        if (n < 1) throw ParameterError("N must be at least 1");
        if (static_cast<std::size_t>(n) > cand_ids.size()) {
            throw ParameterError("N=" + std::to_string(n) + " exceeds the " +
                                 std::to_string(cand_ids.size()) + " available observers");
        }
        const std::size_t worst_pool = truth.size() - std::min<std::size_t>(n, overlap);
        if (worst_pool == 0) {
            throw ParameterError("N=" + std::to_string(n) + " leaves an empty ground-truth holdout (max N = " +
                                 std::to_string(truth.size() - 1) + ")");
        }
    }

    Rng rng(seed);
    // Truth maps depend only on the pool; disjoint mode reuses one per video.
    std::map<std::pair<std::string, std::string>, SaliencyVideo> truth_cache;

    std::vector<CurvePoint> curve;
    for (int n : n_values) {
        std::vector<double> scores;
        scores.reserve(static_cast<std::size_t>(n_resamples));
        for (int r = 0; r < n_resamples; ++r) {
            const auto picks = rng.sample_without_replacement(cand_ids.size(), static_cast<std::size_t>(n));
            // Pool in id order so the same subset always sums identically.
            std::set<std::string> drawn_set;
            for (auto i : picks) drawn_set.insert(cand_ids[i]);
            const std::vector<std::string> drawn(drawn_set.begin(), drawn_set.end());

            std::vector<std::string> pool;
            std::string pool_key;
            for (const auto& [id, _] : truth) {
                if (drawn_set.count(id)) continue;
                pool.push_back(id);
                pool_key += id;
                pool_key.push_back('\x1f');
            }
            if (pool.empty()) throw ParameterError("empty ground-truth holdout");

            double sum = 0.0;
            int used = 0;
            for (const auto& [vid, meta] : videos) {
                const auto cand = detail::pooled_traces(candidates, drawn, vid);
                if (!detail::any_samples(cand)) continue;
                auto key = std::make_pair(vid, pool_key);
                auto it = truth_cache.find(key);
                if (it == truth_cache.end()) {
                    const auto gt = detail::pooled_traces(truth, pool, vid);
                    it = truth_cache.emplace(std::move(key), rasterize_video(gt, meta, params)).first;
                }
                const SaliencyVideo pred = rasterize_video(cand, meta, params);
                try {
                    sum += video_similarity(pred, it->second).mean;
                    ++used;
                } catch (const UndefinedMetricError&) {
                    // No frame with mass on both sides: the video says nothing for this draw.
                }
            }
            if (used == 0) {
                throw UndefinedMetricError("no video has overlapping candidate and ground-truth frames");
            }
            scores.push_back(sum / used);
        }

        CurvePoint pt;
        pt.n = n;
        pt.resamples = n_resamples;
        if (std::all_of(scores.begin(), scores.end(), [&](double s) { return s == scores.front(); })) {
            pt.mean = scores.front();
            pt.stddev = 0.0;
        } else {
            double total = 0.0;
            for (double s : scores) total += s;
            pt.mean = total / static_cast<double>(scores.size());
            double var = 0.0;
            for (double s : scores) var += (s - pt.mean) * (s - pt.mean);
            pt.stddev = std::sqrt(var / static_cast<double>(scores.size()));
        }
        curve.push_back(pt);
    }
    return curve;
}

} // namespace cursal
