#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cursal/cursal.hpp"

namespace cursal::testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "cursal") {
        static int counter = 0;
        Rng rng(static_cast<std::uint64_t>(::getpid()) * 7919u + static_cast<std::uint64_t>(++counter));
        path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(rng.next() % 1000000007u));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    std::string str(const std::string& child = {}) const { return child.empty() ? path_.string() : (path_ / child).string(); }

private:
    fs::path path_;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
}

/// Gaussian-mixture gaze process shared by every synthetic observer of a
/// video. Components drift slowly over frames and the mixture leans towards
/// the frame center.
struct GazeProcess {
    struct Component {
        double x0, y0, vx, vy, spread, weight;
    };
    std::vector<Component> components{
        {0.50, 0.50, 0.004, -0.002, 0.06, 0.5},
        {0.30, 0.40, 0.006, 0.003, 0.05, 0.3},
        {0.72, 0.62, -0.005, 0.002, 0.05, 0.2},
    };

    void sample(int frame, Rng& rng, double& x, double& y) const {
        double u = rng.uniform();
        const Component* c = &components.back();
        for (const auto& comp : components) {
            if (u < comp.weight) {
                c = &comp;
                break;
            }
            u -= comp.weight;
        }
        x = std::clamp(c->x0 + c->vx * frame + c->spread * rng.normal(), 0.0, 1.0);
        y = std::clamp(c->y0 + c->vy * frame + c->spread * rng.normal(), 0.0, 1.0);
    }
};

/// One observer watching `video_id`: `per_frame` samples inside every frame
/// interval, timestamps strictly inside the interval.
inline FixationTrace synth_trace(const std::string& observer, const std::string& video_id, Source source,
                                 const VideoMeta& meta, const GazeProcess& gaze, Rng& rng, int per_frame = 2) {
    FixationTrace t{observer, video_id, source, {}};
    const double period = 1000.0 / meta.fps;
    for (int f = 0; f < meta.n_frames; ++f) {
        for (int s = 0; s < per_frame; ++s) {
            double x, y;
            gaze.sample(f, rng, x, y);
            const auto t_ms = static_cast<std::int64_t>(std::floor(f * period + (s + 0.5) * period / (per_frame + 1)));
            t.samples.push_back({observer, video_id, t_ms, x, y, source});
        }
    }
    return t;
}

/// `count` observers named prefix00, prefix01, ... over every video.
inline ObserverTraces synth_observers(const std::string& prefix, int count, Source source, const VideoIndex& videos,
                                      const GazeProcess& gaze, std::uint64_t seed, int per_frame = 2) {
    Rng rng(seed);
    ObserverTraces out;
    for (int i = 0; i < count; ++i) {
        char id[64];
        std::snprintf(id, sizeof id, "%s%02d", prefix.c_str(), i);
        for (const auto& [vid, meta] : videos) {
            out[id].push_back(synth_trace(id, vid, source, meta, gaze, rng, per_frame));
        }
    }
    return out;
}

inline std::vector<FixationTrace> flatten(const ObserverTraces& by_observer) {
    std::vector<FixationTrace> out;
    for (const auto& [_, traces] : by_observer) out.insert(out.end(), traces.begin(), traces.end());
    return out;
}

/// Dense reference for the rasterizer: every fixation's density Gaussian
/// evaluated at every pixel center, no truncation.
inline SaliencyFrame dense_raster(const std::vector<WeightedPoint>& pts, int w, int h, double sigma_frac) {
    SaliencyFrame out(w, h);
    const double sigma = sigma_frac * w;
    const double pi = 3.14159265358979323846;
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            long double acc = 0.0L;
            for (const auto& p : pts) {
                const double dx = (i + 0.5) - p.x * w;
                const double dy = (j + 0.5) - p.y * h;
                acc += p.weight * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) / (2.0 * pi * sigma * sigma);
            }
            out.at(i, j) = static_cast<double>(acc);
        }
    }
    return out;
}

/// Largest relative deviation of `got` from `want` over pixels where
/// `want` exceeds `floor`.
inline double max_rel_error(const SaliencyFrame& got, const SaliencyFrame& want, double floor = 1e-9) {
    double worst = 0.0;
    for (std::size_t i = 0; i < want.data.size(); ++i) {
        if (want.data[i] <= floor) continue;
        worst = std::max(worst, std::abs(got.data[i] - want.data[i]) / want.data[i]);
    }
    return worst;
}

/// Reference histogram intersection written out term by term.
inline double naive_sim(const SaliencyFrame& a, const SaliencyFrame& b) {
    double sa = 0.0, sb = 0.0;
    for (double v : a.data) sa += v;
    for (double v : b.data) sb += v;
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += std::min(a.data[i] / sa, b.data[i] / sb);
    return s;
}

inline Frame random_frame(int w, int h, int c, Rng& rng) {
    Frame f(w, h, c);
    for (double& v : f.data) v = rng.uniform();
    return f;
}

/// Deterministic white-noise texture on the integer lattice, so shifted
/// copies are exact.
inline double texture(int x, int y) {
    std::uint64_t z = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) ^
                      static_cast<std::uint32_t>(y);
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

inline Frame texture_frame(int w, int h, int shift_x, int shift_y = 0) {
    Frame f(w, h, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f.at(x, y) = texture(x - shift_x, y - shift_y);
    }
    return f;
}

inline io::VideoCatalogEntry catalog_entry(const std::string& id, int w = 64, int h = 36, double fps = 25.0,
                                           int n_frames = 10) {
    io::VideoCatalogEntry e;
    e.video_id = id;
    e.width = w;
    e.height = h;
    e.fps = fps;
    e.n_frames = n_frames;
    e.duration_ms = static_cast<std::int64_t>(std::llround(n_frames * 1000.0 / fps));
    e.asset_path = id + ".mp4";
    return e;
}

} // namespace cursal::testing
