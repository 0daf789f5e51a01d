#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cursal/core/subsample.hpp"
#include "cursal/core/types.hpp"

namespace cursal::io {

struct VideoCatalogEntry {
    std::string video_id;
    int width = 0;
    int height = 0;
    double fps = 25.0;
    std::int64_t duration_ms = 0;
    int n_frames = 0;
    std::string asset_path;
    int view_count = 0;

    VideoMeta meta() const { return {width, height, fps, n_frames}; }

    friend bool operator==(const VideoCatalogEntry&, const VideoCatalogEntry&) = default;
};

inline void validate(const VideoCatalogEntry& e) {
    if (e.video_id.empty()) throw ParameterError("catalog entry without video_id");
    validate(e.meta());
    if (e.view_count < 0) throw ParameterError(e.video_id + ": negative view_count");
    const double period = 1000.0 / e.fps;
    if (std::abs(static_cast<double>(e.duration_ms) - e.n_frames * period) > period + 1e-9) {
        throw ParameterError(e.video_id + ": duration_ms disagrees with n_frames / fps");
    }
}

inline nlohmann::json to_json(const VideoCatalogEntry& e) {
    return {{"video_id", e.video_id},     {"width", e.width},           {"height", e.height},
            {"fps", e.fps},               {"duration_ms", e.duration_ms}, {"n_frames", e.n_frames},
            {"asset_path", e.asset_path}, {"view_count", e.view_count}};
}

inline VideoCatalogEntry catalog_entry_from_json(const nlohmann::json& j) {
    VideoCatalogEntry e;
    e.video_id = j.at("video_id").get<std::string>();
    e.width = j.at("width").get<int>();
    e.height = j.at("height").get<int>();
    e.fps = j.at("fps").get<double>();
    e.n_frames = j.at("n_frames").get<int>();
    e.duration_ms = j.value("duration_ms", static_cast<std::int64_t>(std::llround(e.n_frames * 1000.0 / e.fps)));
    e.asset_path = j.value("asset_path", std::string());
    e.view_count = j.value("view_count", 0);
    validate(e);
    return e;
}

/// Catalog file: {"videos": [ {video_id, width, height, fps, n_frames,
/// duration_ms?, asset_path?, view_count?}, ... ]}.
inline std::vector<VideoCatalogEntry> parse_catalog(const nlohmann::json& j) {
    std::vector<VideoCatalogEntry> out;
    std::set<std::string> seen;
    try {
        for (const auto& v : j.at("videos")) {
            out.push_back(catalog_entry_from_json(v));
            if (!seen.insert(out.back().video_id).second) {
                throw ParameterError("duplicate video_id " + out.back().video_id);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("catalog: ") + e.what());
    }
    return out;
}

inline std::vector<VideoCatalogEntry> load_catalog(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open catalog " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, path + ": " + e.what());
    }
    return parse_catalog(j);
}

inline void save_catalog(const std::string& path, const std::vector<VideoCatalogEntry>& entries) {
    nlohmann::json j{{"videos", nlohmann::json::array()}};
    for (const auto& e : entries) j["videos"].push_back(to_json(e));
    std::ofstream os(path);
    if (!os) throw IoError("cannot write catalog " + path);
    os << j.dump(2) << '\n';
}

inline VideoIndex video_index(const std::vector<VideoCatalogEntry>& entries) {
    VideoIndex idx;
    for (const auto& e : entries) idx[e.video_id] = e.meta();
    return idx;
}

} // namespace cursal::io
