#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "cursal/core/blur.hpp"
#include "cursal/core/types.hpp"

namespace cursal {

/// Cursor position in normalized frame coordinates.
struct CursorPos {
    double x = 0.5;
    double y = 0.5;
};

/// Weight of the sharp layer at squared pixel distance `dist2` from the
/// cursor: exp(-d^2 / (2 sigma_w^2)).
inline double blend_weight(double dist2, double sigma_w) {
    return std::exp(-dist2 / (2.0 * sigma_w * sigma_w));
}

/// Pixel (px, py) is taken at its center (px + 0.5, py + 0.5); the cursor
/// maps to (x * width, y * height).
inline double blend_weight_at(int px, int py, CursorPos cursor, int width, int height,
                              double sigma_w) {
    const double dx = (px + 0.5) - cursor.x * width;
    const double dy = (py + 0.5) - cursor.y * height;
    return blend_weight(dx * dx + dy * dy, sigma_w);
}

/// Two-layer foveated composite: W * sharp + (1 - W) * blurred with the
/// Gaussian weight W centered on the cursor, sigma_w = sigmaw_frac * width.
inline Frame foveated_blend(const Frame& sharp, const Frame& blurred, CursorPos cursor,
                            const FoveationParams& params) {
    validate(sharp);
    validate(blurred);
    params.validate();
    if (!sharp.same_shape(blurred)) throw ShapeError("sharp and blurred layers differ in shape");
    if (!in_unit_square(cursor.x, cursor.y)) throw ParameterError("cursor outside the unit square");

    const double sigma_w = params.sigmaw_frac * sharp.width;
    Frame out(sharp.width, sharp.height, sharp.channels);
    for (int y = 0; y < sharp.height; ++y) {
        for (int x = 0; x < sharp.width; ++x) {
            const double w = blend_weight_at(x, y, cursor, sharp.width, sharp.height, sigma_w);
            for (int c = 0; c < sharp.channels; ++c) {
                const std::size_t i = sharp.index(x, y, c);
                out.data[i] = w * sharp.data[i] + (1.0 - w) * blurred.data[i];
            }
        }
    }
    return out;
}

/// Sample driving the cursor on frame k: the latest one with
/// t_ms <= 1000 k / fps. Returns -1 when the frame precedes every sample.
/// Samples must be time-ordered.
inline long cursor_sample_for_frame(std::span<const FixationSample> samples, int frame, double fps) {
    long chosen = -1;
    const double frame_time_scaled = static_cast<double>(frame) * 1000.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (static_cast<double>(samples[i].t_ms) * fps <= frame_time_scaled) {
            chosen = static_cast<long>(i);
        } else {
            break;
        }
    }
    return chosen;
}

/// Per-frame cursor positions under the hold-last-sample rule; frames before
/// the first sample use the frame center.
inline std::vector<CursorPos> cursor_track(const FixationTrace& trace, int n_frames, double fps) {
    std::vector<CursorPos> out(static_cast<std::size_t>(n_frames));
    for (int k = 0; k < n_frames; ++k) {
        const long i = cursor_sample_for_frame(trace.samples, k, fps);
        if (i >= 0) out[static_cast<std::size_t>(k)] = {trace.samples[i].x, trace.samples[i].y};
    }
    return out;
}

/// Offline reference renderer for the mouse-contingent player.
inline std::vector<Frame> render_foveated_video(std::span<const Frame> frames,
                                                const FixationTrace& trace, double fps,
                                                const FoveationParams& params) {
    if (frames.empty()) throw ParameterError("no frames to render");
    if (!(fps > 0.0)) throw ParameterError("fps must be positive");
    params.validate();
    validate(trace);

    const auto cursors = cursor_track(trace, static_cast<int>(frames.size()), fps);
    std::vector<Frame> out;
    out.reserve(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const Frame& sharp = frames[k];
        const Frame blurred = gaussian_blur(sharp, params.sigma1_frac * sharp.width);
        out.push_back(foveated_blend(sharp, blurred, cursors[k], params));
    }
    return out;
}

} // namespace cursal
