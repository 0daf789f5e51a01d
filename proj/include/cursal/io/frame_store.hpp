#pragma once

// A frame store is a directory holding numbered binary PNM images
// (000000.pgm / 000000.ppm, ...) and a manifest.json with the geometry.
// Image frames use 8- or 16-bit samples scaled to [0,1]. Saliency videos
// use 16-bit single-channel images scaled so the per-video maximum maps to
// 65535; the true maximum is kept in the manifest so values invert exactly
// up to quantization.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cursal/core/types.hpp"

namespace cursal::io {

namespace fs = std::filesystem;

struct StoreManifest {
    std::string kind = "frames"; // "frames" or "saliency"
    std::string video_id;
    int width = 0;
    int height = 0;
    int channels = 1;
    int bit_depth = 8;
    double fps = 25.0;
    int n_frames = 0;
    double max_value = 0.0; // saliency only

    VideoMeta meta() const { return {width, height, fps, n_frames}; }
};

inline nlohmann::json to_json(const StoreManifest& m) {
    nlohmann::json j{{"kind", m.kind},          {"video_id", m.video_id}, {"width", m.width},
                     {"height", m.height},      {"channels", m.channels}, {"bit_depth", m.bit_depth},
                     {"fps", m.fps},            {"n_frames", m.n_frames}};
    if (m.kind == "saliency") j["max_value"] = m.max_value;
    return j;
}

inline StoreManifest manifest_from_json(const nlohmann::json& j) {
    StoreManifest m;
    m.kind = j.value("kind", std::string("frames"));
    m.video_id = j.value("video_id", std::string());
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.channels = j.value("channels", 1);
    m.bit_depth = j.value("bit_depth", 8);
    m.fps = j.at("fps").get<double>();
    m.n_frames = j.at("n_frames").get<int>();
    m.max_value = j.value("max_value", 0.0);
    if (m.kind != "frames" && m.kind != "saliency") throw ParameterError("manifest kind must be frames or saliency");
    if (m.width <= 0 || m.height <= 0 || m.n_frames < 0 || !(m.fps > 0.0)) {
        throw ParameterError("manifest has invalid geometry");
    }
    if (m.channels != 1 && m.channels != 3) throw ParameterError("manifest channels must be 1 or 3");
    if (m.bit_depth != 8 && m.bit_depth != 16) throw ParameterError("manifest bit_depth must be 8 or 16");
    return m;
}

inline fs::path frame_path(const fs::path& dir, int index, int channels) {
    char name[32];
    std::snprintf(name, sizeof name, "%06d.%s", index, channels == 1 ? "pgm" : "ppm");
    return dir / name;
}

inline StoreManifest read_manifest(const fs::path& dir) {
    std::ifstream is(dir / "manifest.json");
    if (!is) throw IoError("missing manifest.json in " + dir.string());
    nlohmann::json j;
    try {
        is >> j;
        return manifest_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, "manifest.json in " + dir.string() + ": " + e.what());
    }
}

inline void write_manifest(const fs::path& dir, const StoreManifest& m) {
    fs::create_directories(dir);
    std::ofstream os(dir / "manifest.json");
    if (!os) throw IoError("cannot write manifest in " + dir.string());
    os << to_json(m).dump(2) << '\n';
}

// ---- binary PNM -------------------------------------------------------

struct RawImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    int maxval = 255;
    std::vector<std::uint16_t> samples; // row-major, interleaved
};

inline void write_pnm(const fs::path& path, const RawImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
    if (img.maxval < 256) {
        std::vector<char> buf(img.samples.size());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<char>(img.samples[i]);
        os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    } else {
        std::vector<char> buf(img.samples.size() * 2);
        for (std::size_t i = 0; i < img.samples.size(); ++i) {
            buf[2 * i] = static_cast<char>(img.samples[i] >> 8);
            buf[2 * i + 1] = static_cast<char>(img.samples[i] & 0xff);
        }
        os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    if (!os) throw IoError("short write to " + path.string());
}

inline RawImage read_pnm(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    auto token = [&]() {
        std::string t;
        char c;
        while (is.get(c)) {
            if (c == '#') {
                std::string skip;
                std::getline(is, skip);
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                t.push_back(c);
                break;
            }
        }
        while (is.get(c) && !std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
        return t;
    };
    RawImage img;
    const std::string magic = token();
    if (magic == "P5") {
        img.channels = 1;
    } else if (magic == "P6") {
        img.channels = 3;
    } else {
        throw ParseError(0, path.string() + ": not a binary PGM/PPM");
    }
    try {
        img.width = std::stoi(token());
        img.height = std::stoi(token());
        img.maxval = std::stoi(token());
    } catch (const std::exception&) {
        throw ParseError(0, path.string() + ": bad PNM header");
    }
    if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535) {
        throw ParseError(0, path.string() + ": bad PNM header");
    }
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
    const std::size_t bytes = img.maxval < 256 ? n : 2 * n;
    std::vector<unsigned char> buf(bytes);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(is.gcount()) != bytes) throw ParseError(0, path.string() + ": truncated pixel data");
    img.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        img.samples[i] = img.maxval < 256 ? buf[i] : static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
    return img;
}

// ---- image frames -----------------------------------------------------

inline std::uint16_t quantize_unit(double v, int maxval) {
    return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
}

inline void write_frames(const fs::path& dir, std::span<const Frame> frames, double fps, int bit_depth = 8,
                         const std::string& video_id = {}) {
    if (frames.empty()) throw ParameterError("no frames to write");
    if (bit_depth != 8 && bit_depth != 16) throw ParameterError("bit depth must be 8 or 16");
    StoreManifest m;
    m.kind = "frames";
    m.video_id = video_id;
    m.width = frames[0].width;
    m.height = frames[0].height;
    m.channels = frames[0].channels;
    m.bit_depth = bit_depth;
    m.fps = fps;
    m.n_frames = static_cast<int>(frames.size());
    fs::create_directories(dir);
    const int maxval = bit_depth == 8 ? 255 : 65535;
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const Frame& f = frames[k];
        validate(f);
        if (!f.same_shape(frames[0])) throw ShapeError("frames differ in shape");
        RawImage img{f.width, f.height, f.channels, maxval, {}};
        img.samples.reserve(f.data.size());
        for (double v : f.data) img.samples.push_back(quantize_unit(v, maxval));
        write_pnm(frame_path(dir, static_cast<int>(k), f.channels), img);
    }
    write_manifest(dir, m);
}

inline std::vector<Frame> read_frames(const fs::path& dir, StoreManifest* manifest_out = nullptr) {
    const StoreManifest m = read_manifest(dir);
    if (m.kind != "frames") throw ParameterError(dir.string() + " is not an image frame store");
    std::vector<Frame> frames;
    for (int k = 0; k < m.n_frames; ++k) {
        const RawImage img = read_pnm(frame_path(dir, k, m.channels));
        if (img.width != m.width || img.height != m.height || img.channels != m.channels) {
            throw ShapeError("frame " + std::to_string(k) + " disagrees with the manifest");
        }
        Frame f(img.width, img.height, img.channels);
        for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = static_cast<double>(img.samples[i]) / img.maxval;
        frames.push_back(std::move(f));
    }
    if (manifest_out) *manifest_out = m;
    return frames;
}

// ---- saliency videos --------------------------------------------------

inline double video_max(const SaliencyVideo& v) {
    double mx = 0.0;
    for (const auto& f : v.frames) {
        for (double x : f.data) mx = std::max(mx, x);
    }
    return mx;
}

/// 16-bit code of saliency value `v` for a video whose maximum is `max_value`.
inline std::uint16_t saliency_code(double v, double max_value) {
    if (!(max_value > 0.0)) return 0;
    return static_cast<std::uint16_t>(std::lround(std::clamp(v / max_value, 0.0, 1.0) * 65535.0));
}

inline double saliency_value(std::uint16_t code, double max_value) {
    return static_cast<double>(code) / 65535.0 * max_value;
}

/// What a write/read cycle through a saliency store returns for `v`.
inline SaliencyVideo quantize_saliency(const SaliencyVideo& v) {
    SaliencyVideo out = v;
    const double mx = video_max(v);
    for (auto& f : out.frames) {
        for (double& x : f.data) x = saliency_value(saliency_code(x, mx), mx);
    }
    return out;
}

inline void write_saliency(const fs::path& dir, const SaliencyVideo& video) {
    if (video.frames.empty()) throw ParameterError("no saliency frames to write");
    StoreManifest m;
    m.kind = "saliency";
    m.video_id = video.video_id;
    m.width = video.frames[0].width;
    m.height = video.frames[0].height;
    m.channels = 1;
    m.bit_depth = 16;
    m.fps = video.fps;
    m.n_frames = static_cast<int>(video.frames.size());
    m.max_value = video_max(video);
    fs::create_directories(dir);
    for (std::size_t k = 0; k < video.frames.size(); ++k) {
        const SaliencyFrame& f = video.frames[k];
        validate(f);
        if (!f.same_shape(video.frames[0])) throw ShapeError("saliency frames differ in shape");
        RawImage img{f.width, f.height, 1, 65535, {}};
        img.samples.reserve(f.data.size());
        for (double v : f.data) img.samples.push_back(saliency_code(v, m.max_value));
        write_pnm(frame_path(dir, static_cast<int>(k), 1), img);
    }
    write_manifest(dir, m);
}

inline SaliencyVideo read_saliency(const fs::path& dir, StoreManifest* manifest_out = nullptr) {
    const StoreManifest m = read_manifest(dir);
    if (m.kind != "saliency") throw ParameterError(dir.string() + " is not a saliency store");
    SaliencyVideo v;
    v.video_id = m.video_id;
    v.fps = m.fps;
    for (int k = 0; k < m.n_frames; ++k) {
        const RawImage img = read_pnm(frame_path(dir, k, 1));
        if (img.width != m.width || img.height != m.height || img.channels != 1 || img.maxval != 65535) {
            throw ShapeError("saliency frame " + std::to_string(k) + " disagrees with the manifest");
        }
        SaliencyFrame f(img.width, img.height);
        for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = saliency_value(img.samples[i], m.max_value);
        v.frames.push_back(std::move(f));
    }
    if (manifest_out) *manifest_out = m;
    return v;
}

} // namespace cursal::io
