#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cursal/error.hpp"

namespace cursal {

enum class Source { mouse, eye };

inline std::string_view to_string(Source s) { return s == Source::mouse ? "mouse" : "eye"; }

inline bool parse_source(std::string_view text, Source& out) {
    if (text == "mouse") {
        out = Source::mouse;
        return true;
    }
    if (text == "eye") {
        out = Source::eye;
        return true;
    }
    return false;
}

/// One timestamped gaze or cursor position. Coordinates are fractions of
/// the frame width/height so traces recorded on different screens share a
/// coordinate system.
struct FixationSample {
    std::string observer_id;
    std::string video_id;
    std::int64_t t_ms = 0;
    double x = 0.0;
    double y = 0.0;
    Source source = Source::mouse;

    friend bool operator==(const FixationSample&, const FixationSample&) = default;
};

inline bool in_unit_square(double x, double y) {
    return x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0;
}

/// One observer's viewing of one video.
struct FixationTrace {
    std::string observer_id;
    std::string video_id;
    Source source = Source::mouse;
    std::vector<FixationSample> samples;

    friend bool operator==(const FixationTrace&, const FixationTrace&) = default;
};

/// Throws ConsistencyError/ParameterError when the trace violates its
/// invariants (shared ids, non-decreasing time, unit-square coordinates).
inline void validate(const FixationTrace& trace) {
    std::int64_t last = 0;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const auto& s = trace.samples[i];
        if (s.observer_id != trace.observer_id || s.video_id != trace.video_id ||
            s.source != trace.source) {
            throw ConsistencyError("sample " + std::to_string(i) +
                                   " does not belong to trace " + trace.observer_id + "/" +
                                   trace.video_id);
        }
        if (s.t_ms < 0 || (i > 0 && s.t_ms < last)) {
            throw ParameterError("sample " + std::to_string(i) + " breaks time order");
        }
        if (!in_unit_square(s.x, s.y)) {
            throw ParameterError("sample " + std::to_string(i) + " lies outside the unit square");
        }
        last = s.t_ms;
    }
}

/// Row-major image with interleaved channels, intensities in [0,1].
struct Frame {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    Frame() = default;
    Frame(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {}

    std::size_t index(int x, int y, int c = 0) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels) +
               static_cast<std::size_t>(c);
    }
    double& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
    double at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

    bool same_shape(const Frame& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }

    friend bool operator==(const Frame&, const Frame&) = default;
};

inline void validate(const Frame& f) {
    if (f.width <= 0 || f.height <= 0) throw ParameterError("frame dimensions must be positive");
    if (f.channels != 1 && f.channels != 3) throw ParameterError("frame must have 1 or 3 channels");
    if (f.data.size() != static_cast<std::size_t>(f.width) * f.height * f.channels) {
        throw ShapeError("frame data length does not match its dimensions");
    }
}

/// Non-negative attention map over one frame.
struct SaliencyFrame {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    SaliencyFrame() = default;
    SaliencyFrame(int w, int h, double fill = 0.0)
        : width(w), height(h),
          data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool same_shape(const SaliencyFrame& o) const {
        return width == o.width && height == o.height;
    }

    friend bool operator==(const SaliencyFrame&, const SaliencyFrame&) = default;
};

inline void validate(const SaliencyFrame& f) {
    if (f.width <= 0 || f.height <= 0) throw ParameterError("saliency dimensions must be positive");
    if (f.data.size() != static_cast<std::size_t>(f.width) * f.height) {
        throw ShapeError("saliency data length does not match its dimensions");
    }
    for (double v : f.data) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ParameterError("saliency values must be finite and non-negative");
        }
    }
}

struct SaliencyVideo {
    std::string video_id;
    double fps = 25.0;
    std::vector<SaliencyFrame> frames;

    friend bool operator==(const SaliencyVideo&, const SaliencyVideo&) = default;
};

/// Geometry and timing of a video, enough to place samples on frames.
struct VideoMeta {
    int width = 0;
    int height = 0;
    double fps = 25.0;
    int n_frames = 0;
};

inline void validate(const VideoMeta& m) {
    if (m.width <= 0 || m.height <= 0) throw ParameterError("video dimensions must be positive");
    if (!(m.fps > 0.0)) throw ParameterError("fps must be positive");
    if (m.n_frames <= 0) throw ParameterError("video must have at least one frame");
}

/// Blur and blend constants of the mouse-contingent display. Both are
/// fractions of the video width.
struct FoveationParams {
    double sigma1_frac = 0.02;
    double sigmaw_frac = 0.2;

    void validate() const {
        if (!(sigma1_frac > 0.0) || !(sigmaw_frac > 0.0)) {
            throw ParameterError("foveation sigmas must be positive");
        }
    }
};

/// Fixation kernel width (fraction of video width) and its truncation
/// radius in multiples of sigma.
struct RasterParams {
    double sigma_frac = 0.0625;
    double truncation_radius_sigmas = 9.0;

    void validate() const {
        if (!(sigma_frac > 0.0)) throw ParameterError("sigma_frac must be positive");
        if (!(truncation_radius_sigmas >= 3.0)) {
            throw ParameterError("truncation_radius_sigmas must be at least 3");
        }
    }
};

} // namespace cursal
