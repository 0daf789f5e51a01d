#pragma once

// Binary motion-field file, all integers little-endian uint32:
//
//   "CSMF" | version=1 | frame_width | frame_height | block_size
//          | grid_width | grid_height | n_frames
//   then n_frames * grid_height * grid_width pairs of float32 (dx, dy),
//   frame-major, blocks row-major, little-endian IEEE-754.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "cursal/postprocess/motion.hpp"

namespace cursal::io {

inline constexpr std::array<char, 4> kMotionMagic{'C', 'S', 'M', 'F'};
inline constexpr std::uint32_t kMotionVersion = 1;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw ParseError(0, "motion file truncated");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f32(std::ostream& os, double v) {
    put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

inline double get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }

} // namespace detail

inline void write_motion(std::ostream& os, const MotionField& m) {
    validate(m);
    os.write(kMotionMagic.data(), 4);
    detail::put_u32(os, kMotionVersion);
    detail::put_u32(os, static_cast<std::uint32_t>(m.frame_width));
    detail::put_u32(os, static_cast<std::uint32_t>(m.frame_height));
    detail::put_u32(os, static_cast<std::uint32_t>(m.block_size));
    detail::put_u32(os, static_cast<std::uint32_t>(m.grid_width()));
    detail::put_u32(os, static_cast<std::uint32_t>(m.grid_height()));
    detail::put_u32(os, static_cast<std::uint32_t>(m.n_frames()));
    for (const auto& f : m.vectors) {
        for (const auto& v : f) {
            detail::put_f32(os, v.dx);
            detail::put_f32(os, v.dy);
        }
    }
}

inline MotionField read_motion(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMotionMagic.data(), 4) != 0) {
        throw ParseError(0, "not a motion field file");
    }
    if (detail::get_u32(is) != kMotionVersion) throw ParseError(0, "unsupported motion file version");
    MotionField m;
    m.frame_width = static_cast<int>(detail::get_u32(is));
    m.frame_height = static_cast<int>(detail::get_u32(is));
    m.block_size = static_cast<int>(detail::get_u32(is));
    const auto gw = detail::get_u32(is);
    const auto gh = detail::get_u32(is);
    const auto n = detail::get_u32(is);
    if (m.frame_width <= 0 || m.frame_height <= 0 || m.block_size <= 0 ||
        gw != static_cast<std::uint32_t>(m.grid_width()) || gh != static_cast<std::uint32_t>(m.grid_height())) {
        throw ParseError(0, "motion file header is inconsistent");
    }
    m.vectors.assign(n, std::vector<MotionVector>(static_cast<std::size_t>(gw) * gh));
    for (auto& f : m.vectors) {
        for (auto& v : f) {
            v.dx = detail::get_f32(is);
            v.dy = detail::get_f32(is);
        }
    }
    validate(m);
    return m;
}

inline void save_motion(const std::string& path, const MotionField& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    write_motion(os, m);
    if (!os) throw IoError("short write to " + path);
}

inline MotionField load_motion(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    return read_motion(is);
}

} // namespace cursal::io
