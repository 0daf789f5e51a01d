#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cursal/core/types.hpp"

namespace cursal {

/// Sampled 1-D Gaussian on [-r, r], r = ceil(5 sigma), normalized to sum 1.
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("blur sigma must be positive");
    const int radius = std::max(1, static_cast<int>(std::ceil(5.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Separable Gaussian blur with replicated edges. Output has the input's
/// shape; each channel is filtered independently.
inline Frame gaussian_blur(const Frame& frame, double sigma) {
    validate(frame);
    const std::vector<double> kernel = gaussian_kernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = frame.width, h = frame.height, nc = frame.channels;

    Frame tmp(w, h, nc);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < nc; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int sx = std::clamp(x + i, 0, w - 1);
                    acc += kernel[static_cast<std::size_t>(i + radius)] * frame.at(sx, y, c);
                }
                tmp.at(x, y, c) = acc;
            }
        }
    }

    Frame out(w, h, nc);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < nc; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int sy = std::clamp(y + i, 0, h - 1);
                    acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.at(x, sy, c);
                }
                out.at(x, y, c) = std::clamp(acc, 0.0, 1.0);
            }
        }
    }
    return out;
}

} // namespace cursal
