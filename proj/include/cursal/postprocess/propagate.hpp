#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "cursal/core/raster.hpp"
#include "cursal/postprocess/motion.hpp"

namespace cursal {

namespace detail {

// Moves a normalized point from frame `from` to frame `to` by chaining the
// per-frame block vectors. Backward steps invert the vector of the block the
// point sits in; forward steps look up the block at the point's current
// position in the next frame's grid. The point is clamped after every step.
inline WeightedPoint carry(WeightedPoint p, int from, int to, const MotionField& motion) {
    const double w = motion.frame_width, h = motion.frame_height;
    const double px0 = p.x * w, py0 = p.y * h;
    double px = px0, py = py0;
    if (to < from) {
        for (int u = from; u > to; --u) {
            const MotionVector v = motion.at_pixel(u, px, py);
            px = std::clamp(px - v.dx, 0.0, w);
            py = std::clamp(py - v.dy, 0.0, h);
        }
    } else {
        for (int u = from + 1; u <= to; ++u) {
            const MotionVector v = motion.at_pixel(u, px, py);
            px = std::clamp(px + v.dx, 0.0, w);
            py = std::clamp(py + v.dy, 0.0, h);
        }
    }
    // Unmoved coordinates are returned untouched, not round-tripped via pixels.
    if (px != px0) p.x = std::clamp(px / w, 0.0, 1.0);
    if (py != py0) p.y = std::clamp(py / h, 0.0, 1.0);
    return p;
}

} // namespace detail

/// Adds to each frame the fixations of its neighbours up to `window_k`
/// frames away, moved along the motion field and down-weighted by
/// decay^distance. Each output frame lists its own fixations first, then
/// for j = 1..k those from t - j followed by those from t + j. Windows are
/// clipped at the video ends.
inline std::vector<std::vector<WeightedPoint>> propagate_fixations(
    std::span<const std::vector<WeightedPoint>> per_frame, const MotionField& motion, int window_k,
    double decay) {
    if (window_k < 0) throw ParameterError("window_k must be non-negative");
    if (!(decay > 0.0 && decay <= 1.0)) throw ParameterError("decay must be in (0, 1]");
    validate(motion);
    const int n = static_cast<int>(per_frame.size());
    if (motion.n_frames() != n) {
        throw ShapeError("motion field covers " + std::to_string(motion.n_frames()) + " frames, fixations " +
                         std::to_string(n));
    }

    std::vector<std::vector<WeightedPoint>> out(per_frame.begin(), per_frame.end());
    for (int t = 0; t < n; ++t) {
        auto& dst = out[static_cast<std::size_t>(t)];
        double factor = 1.0;
        for (int j = 1; j <= window_k; ++j) {
            factor *= decay;
            for (const int src : {t - j, t + j}) {
                if (src < 0 || src >= n) continue;
                for (WeightedPoint p : per_frame[static_cast<std::size_t>(src)]) {
                    p = detail::carry(p, src, t, motion);
                    p.weight *= factor;
                    dst.push_back(p);
                }
            }
        }
    }
    return out;
}

} // namespace cursal
