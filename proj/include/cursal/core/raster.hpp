#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "cursal/core/types.hpp"

namespace cursal {

/// Fixation position in normalized coordinates with a multiplicative weight
/// on its kernel. Plain fixations carry weight 1.
struct WeightedPoint {
    double x = 0.0;
    double y = 0.0;
    double weight = 1.0;

    friend bool operator==(const WeightedPoint&, const WeightedPoint&) = default;
};

/// Sum of isotropic 2-D Gaussian densities (each integrating to `weight`
/// over the plane) sampled at pixel centers. Contributions farther than
/// truncation_radius_sigmas * sigma from their center are dropped. Points are
/// accumulated in input order, so the result is independent of threading.
inline SaliencyFrame rasterize_points(std::span<const WeightedPoint> points, int width, int height,
                                      const RasterParams& params) {
    if (width <= 0 || height <= 0) throw ParameterError("raster dimensions must be positive");
    params.validate();

    SaliencyFrame out(width, height);
    const double sigma = params.sigma_frac * width;
    const double radius = params.truncation_radius_sigmas * sigma;
    const double radius2 = radius * radius;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);

    std::vector<double> gx, dx2;
    std::vector<double> gy, dy2;
    for (const WeightedPoint& p : points) {
        if (!in_unit_square(p.x, p.y)) throw ParameterError("fixation outside the unit square");
        if (!(p.weight >= 0.0) || !std::isfinite(p.weight)) {
            throw ParameterError("fixation weight must be finite and non-negative");
        }
        const double cx = p.x * width;
        const double cy = p.y * height;
        // Pixel centers within the radius along each axis.
        const int x0 = std::max(0, static_cast<int>(std::ceil(cx - radius - 0.5)));
        const int x1 = std::min(width - 1, static_cast<int>(std::floor(cx + radius - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(cy - radius - 0.5)));
        const int y1 = std::min(height - 1, static_cast<int>(std::floor(cy + radius - 0.5)));
        if (x0 > x1 || y0 > y1) continue;

        gx.resize(static_cast<std::size_t>(x1 - x0 + 1));
        dx2.resize(gx.size());
        for (int x = x0; x <= x1; ++x) {
            const double d = (x + 0.5) - cx;
            dx2[static_cast<std::size_t>(x - x0)] = d * d;
            gx[static_cast<std::size_t>(x - x0)] = std::exp(-d * d * inv2s2);
        }
        gy.resize(static_cast<std::size_t>(y1 - y0 + 1));
        dy2.resize(gy.size());
        for (int y = y0; y <= y1; ++y) {
            const double d = (y + 0.5) - cy;
            dy2[static_cast<std::size_t>(y - y0)] = d * d;
            gy[static_cast<std::size_t>(y - y0)] = std::exp(-d * d * inv2s2);
        }

        const double scale = p.weight * norm;
        for (int y = y0; y <= y1; ++y) {
            const double ry = dy2[static_cast<std::size_t>(y - y0)];
            const double wy = scale * gy[static_cast<std::size_t>(y - y0)];
            double* row = out.data.data() + static_cast<std::size_t>(y) * width;
            for (int x = x0; x <= x1; ++x) {
                if (ry + dx2[static_cast<std::size_t>(x - x0)] > radius2) continue;
                row[x] += wy * gx[static_cast<std::size_t>(x - x0)];
            }
        }
    }
    return out;
}

/// Saliency map of the fixations falling on one frame.
inline SaliencyFrame rasterize_fixations(std::span<const FixationSample> fixations, int width,
                                         int height, const RasterParams& params) {
    std::vector<WeightedPoint> points;
    points.reserve(fixations.size());
    for (const auto& f : fixations) points.push_back({f.x, f.y, 1.0});
    return rasterize_points(points, width, height, params);
}

/// Frame a sample falls on: floor(t_ms * fps / 1000) clamped to the video.
inline int frame_of_sample(std::int64_t t_ms, double fps, int n_frames) {
    const double k = std::floor(static_cast<double>(t_ms) * fps / 1000.0);
    if (k < 0.0) return 0;
    if (k >= n_frames - 1) return n_frames - 1;
    return static_cast<int>(k);
}

/// Groups every sample of every trace by frame. Samples keep trace order,
/// then time order, within a frame.
inline std::vector<std::vector<WeightedPoint>> bin_traces(std::span<const FixationTrace> traces,
                                                          const VideoMeta& meta) {
    validate(meta);
    std::vector<std::vector<WeightedPoint>> bins(static_cast<std::size_t>(meta.n_frames));
    if (traces.empty()) return bins;
    const std::string& vid = traces.front().video_id;
    for (const auto& t : traces) {
        if (t.video_id != vid) {
            throw ConsistencyError("traces reference different videos: " + vid + " and " + t.video_id);
        }
        for (const auto& s : t.samples) {
            if (s.video_id != vid) throw ConsistencyError("sample video id differs from its trace");
            if (!in_unit_square(s.x, s.y)) throw ParameterError("fixation outside the unit square");
            bins[static_cast<std::size_t>(frame_of_sample(s.t_ms, meta.fps, meta.n_frames))]
                .push_back({s.x, s.y, 1.0});
        }
    }
    return bins;
}

inline SaliencyVideo rasterize_bins(std::span<const std::vector<WeightedPoint>> bins,
                                    const VideoMeta& meta, const RasterParams& params,
                                    std::string video_id = {}) {
    validate(meta);
    SaliencyVideo video;
    video.video_id = std::move(video_id);
    video.fps = meta.fps;
    video.frames.reserve(bins.size());
    for (const auto& b : bins) video.frames.push_back(rasterize_points(b, meta.width, meta.height, params));
    return video;
}

/// Per-frame saliency of a set of traces of one video. No clustering or
/// outlier filtering: every sample counts as a fixation.
inline SaliencyVideo rasterize_video(std::span<const FixationTrace> traces, const VideoMeta& meta,
                                     const RasterParams& params) {
    const auto bins = bin_traces(traces, meta);
    return rasterize_bins(bins, meta, params, traces.empty() ? std::string{} : traces.front().video_id);
}

} // namespace cursal
