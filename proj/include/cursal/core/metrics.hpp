#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cursal/core/types.hpp"

namespace cursal {

namespace detail {

inline double checked_mass(const SaliencyFrame& f, const char* which) {
    double sum = 0.0;
    for (double v : f.data) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ParameterError(std::string("map ") + which + " has a negative or non-finite value");
        }
        sum += v;
    }
    return sum;
}

} // namespace detail

/// Histogram intersection of the two maps after each is normalized to unit
/// sum. Throws UndefinedMetricError if either map has no mass.
inline double similarity_score(const SaliencyFrame& a, const SaliencyFrame& b) {
    if (!a.same_shape(b) || a.data.size() != b.data.size()) {
        throw ShapeError("similarity_score: maps differ in shape");
    }
    const double sa = detail::checked_mass(a, "a");
    const double sb = detail::checked_mass(b, "b");
    if (!(sa > 0.0) || !(sb > 0.0)) throw UndefinedMetricError("similarity_score: all-zero map");
    double sim = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        sim += std::min(a.data[i] / sa, b.data[i] / sb);
    }
    return std::clamp(sim, 0.0, 1.0);
}

inline bool has_mass(const SaliencyFrame& f) {
    return std::any_of(f.data.begin(), f.data.end(), [](double v) { return v > 0.0; });
}

struct VideoSimilarity {
    double mean = 0.0;
    /// One entry per frame; NaN where the frame was skipped.
    std::vector<double> per_frame;
    int skipped = 0;
};

/// Mean per-frame similarity. Frames where either side has no mass are
/// skipped and counted; zero valid frames is an UndefinedMetricError.
inline VideoSimilarity video_similarity(const SaliencyVideo& a, const SaliencyVideo& b) {
    if (a.frames.size() != b.frames.size()) {
        throw ShapeError("video_similarity: frame counts differ (" + std::to_string(a.frames.size()) +
                         " vs " + std::to_string(b.frames.size()) + ")");
    }
    VideoSimilarity r;
    r.per_frame.reserve(a.frames.size());
    double sum = 0.0;
    int valid = 0;
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        if (!a.frames[i].same_shape(b.frames[i])) throw ShapeError("video_similarity: frame shapes differ");
        if (!has_mass(a.frames[i]) || !has_mass(b.frames[i])) {
            r.per_frame.push_back(std::numeric_limits<double>::quiet_NaN());
            ++r.skipped;
            continue;
        }
        const double s = similarity_score(a.frames[i], b.frames[i]);
        r.per_frame.push_back(s);
        sum += s;
        ++valid;
    }
    if (valid == 0) throw UndefinedMetricError("video_similarity: no frame has mass on both sides");
    r.mean = sum / valid;
    return r;
}

} // namespace cursal
