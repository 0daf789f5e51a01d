#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "cursal/core/types.hpp"

namespace cursal {

struct MotionVector {
    double dx = 0.0;
    double dy = 0.0;

    friend bool operator==(const MotionVector&, const MotionVector&) = default;
};

/// Block motion for every frame of a video.
///
/// `vectors[t]` holds one vector per block of frame t (row-major over the
/// block grid): content of the block at p in frame t came from p - v in
/// frame t - 1, so a rightward pan of 3 px reads (+3, 0). Frame 0 has no
/// predecessor and carries zero vectors.
struct MotionField {
    int frame_width = 0;
    int frame_height = 0;
    int block_size = 16;
    std::vector<std::vector<MotionVector>> vectors;

    int grid_width() const { return (frame_width + block_size - 1) / block_size; }
    int grid_height() const { return (frame_height + block_size - 1) / block_size; }
    int n_frames() const { return static_cast<int>(vectors.size()); }

    /// Vector of the block of frame `t` containing pixel position (px, py).
    MotionVector at_pixel(int t, double px, double py) const {
        const int bx = std::clamp(static_cast<int>(std::floor(px / block_size)), 0, grid_width() - 1);
        const int by = std::clamp(static_cast<int>(std::floor(py / block_size)), 0, grid_height() - 1);
        return vectors[static_cast<std::size_t>(t)][static_cast<std::size_t>(by) * grid_width() + bx];
    }

    friend bool operator==(const MotionField&, const MotionField&) = default;
};

inline void validate(const MotionField& m) {
    if (m.frame_width <= 0 || m.frame_height <= 0) throw ParameterError("motion field frame size must be positive");
    if (m.block_size <= 0) throw ParameterError("motion field block size must be positive");
    const auto cells = static_cast<std::size_t>(m.grid_width()) * static_cast<std::size_t>(m.grid_height());
    for (const auto& f : m.vectors) {
        if (f.size() != cells) throw ShapeError("motion field grid does not match its frame size");
        for (const auto& v : f) {
            if (!std::isfinite(v.dx) || !std::isfinite(v.dy)) throw ParameterError("motion vector is not finite");
        }
    }
}

namespace detail {

inline std::vector<double> luma(const Frame& f) {
    std::vector<double> out(static_cast<std::size_t>(f.width) * f.height);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (int c = 0; c < f.channels; ++c) s += f.data[i * f.channels + c];
        out[i] = s / f.channels;
    }
    return out;
}

} // namespace detail

/// Exhaustive SAD block matching between consecutive frames. Candidates
/// must lie fully inside the previous frame. Ties go to the zero vector,
/// then to the lexicographically smallest (dy, dx).
inline MotionField estimate_motion(std::span<const Frame> frames, int block_size, int search_radius) {
    if (frames.size() < 2) throw ParameterError("motion estimation needs at least two frames");
    if (block_size < 4) throw ParameterError("block size must be at least 4");
    if (search_radius < 0) throw ParameterError("search radius must be non-negative");
    for (const auto& f : frames) {
        validate(f);
        if (f.width != frames[0].width || f.height != frames[0].height) {
            throw ShapeError("frames differ in size");
        }
    }

    MotionField field;
    field.frame_width = frames[0].width;
    field.frame_height = frames[0].height;
    field.block_size = block_size;
    const int w = field.frame_width, h = field.frame_height;
    const int gw = field.grid_width(), gh = field.grid_height();
    field.vectors.assign(frames.size(), std::vector<MotionVector>(static_cast<std::size_t>(gw) * gh));

    std::vector<double> prev = detail::luma(frames[0]);
    for (std::size_t t = 1; t < frames.size(); ++t) {
        std::vector<double> cur = detail::luma(frames[t]);
        for (int by = 0; by < gh; ++by) {
            for (int bx = 0; bx < gw; ++bx) {
                const int x0 = bx * block_size, y0 = by * block_size;
                const int bw = std::min(block_size, w - x0), bh = std::min(block_size, h - y0);

                auto sad = [&](int dx, int dy) {
                    double s = 0.0;
                    for (int y = 0; y < bh; ++y) {
                        const double* a = cur.data() + static_cast<std::size_t>(y0 + y) * w + x0;
                        const double* b = prev.data() + static_cast<std::size_t>(y0 + y - dy) * w + (x0 - dx);
                        for (int x = 0; x < bw; ++x) s += std::abs(a[x] - b[x]);
                    }
                    return s;
                };

                double best = std::numeric_limits<double>::infinity();
                MotionVector best_v{};
                for (int dy = -search_radius; dy <= search_radius; ++dy) {
                    if (y0 - dy < 0 || y0 - dy + bh > h) continue;
                    for (int dx = -search_radius; dx <= search_radius; ++dx) {
                        if (x0 - dx < 0 || x0 - dx + bw > w) continue;
                        const double s = sad(dx, dy);
                        if (s < best) {
                            best = s;
                            best_v = {static_cast<double>(dx), static_cast<double>(dy)};
                        }
                    }
                }
                if (sad(0, 0) <= best) best_v = {};
                field.vectors[t][static_cast<std::size_t>(by) * gw + bx] = best_v;
            }
        }
        prev = std::move(cur);
    }
    return field;
}

} // namespace cursal
