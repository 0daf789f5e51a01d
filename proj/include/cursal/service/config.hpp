#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "cursal/core/types.hpp"
#include "cursal/error.hpp"

namespace cursal::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string asset_dir;
    std::string data_dir = "cursal-data";
    std::string catalog_path; // empty: <asset_dir>/catalog.json
    std::string secret;       // empty: generated once and kept in <data_dir>/secret
    std::string admin_token;  // empty: admin endpoints disabled
    std::string webhook_url;
    std::string web_dir; // optional static front-end
    int playlist_size = 10;
    int min_screen_width = 1024;
    double min_fps = 20.0;
    std::optional<std::uint64_t> seed;
    bool fsync = false;
    FoveationParams foveation;

    std::string resolved_catalog() const {
        return catalog_path.empty() ? asset_dir + "/catalog.json" : catalog_path;
    }

    void validate() const {
        if (port < 0 || port > 65535) throw ParameterError("port out of range");
        if (playlist_size < 1) throw ParameterError("playlist_size must be at least 1");
        if (min_screen_width < 0) throw ParameterError("min_screen_width must be non-negative");
        if (!(min_fps >= 0.0)) throw ParameterError("min_fps must be non-negative");
        if (asset_dir.empty()) throw ParameterError("asset_dir is required");
        foveation.validate();
    }
};

namespace detail {

inline void split_listen(const std::string& listen, ServiceConfig& c) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw ParameterError("listen must be host:port, got '" + listen + "'");
    c.host = listen.substr(0, colon);
    try {
        c.port = std::stoi(listen.substr(colon + 1));
    } catch (const std::exception&) {
        throw ParameterError("bad port in listen address '" + listen + "'");
    }
}

} // namespace detail

/// Applies a JSON config object on top of `c`.
inline void apply_json(ServiceConfig& c, const nlohmann::json& j) {
    try {
        if (j.contains("listen")) detail::split_listen(j.at("listen").get<std::string>(), c);
        if (j.contains("asset_dir")) c.asset_dir = j.at("asset_dir").get<std::string>();
        if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
        if (j.contains("catalog")) c.catalog_path = j.at("catalog").get<std::string>();
        if (j.contains("secret")) c.secret = j.at("secret").get<std::string>();
        if (j.contains("admin_token")) c.admin_token = j.at("admin_token").get<std::string>();
        if (j.contains("webhook_url")) c.webhook_url = j.at("webhook_url").get<std::string>();
        if (j.contains("web_dir")) c.web_dir = j.at("web_dir").get<std::string>();
        if (j.contains("playlist_size")) c.playlist_size = j.at("playlist_size").get<int>();
        if (j.contains("min_screen_width")) c.min_screen_width = j.at("min_screen_width").get<int>();
        if (j.contains("min_fps")) c.min_fps = j.at("min_fps").get<double>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("fsync")) c.fsync = j.at("fsync").get<bool>();
        if (j.contains("sigma1_frac")) c.foveation.sigma1_frac = j.at("sigma1_frac").get<double>();
        if (j.contains("sigmaw_frac")) c.foveation.sigmaw_frac = j.at("sigmaw_frac").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("config: ") + e.what());
    }
}

using EnvLookup = std::function<const char*(const char*)>;

/// CURSAL_* environment variables; each one present overrides the file.
inline void apply_env(ServiceConfig& c, const EnvLookup& env = [](const char* k) { return std::getenv(k); }) {
    auto str = [&](const char* key, std::string& dst) {
        if (const char* v = env(key)) dst = v;
    };
    auto num = [&](const char* key, auto& dst) {
        const char* v = env(key);
        if (!v) return;
        try {
            using T = std::decay_t<decltype(dst)>;
            if constexpr (std::is_same_v<T, int>) {
                dst = std::stoi(v);
            } else {
                dst = std::stod(v);
            }
        } catch (const std::exception&) {
            throw ParameterError(std::string("bad numeric value in ") + key);
        }
    };
    if (const char* v = env("CURSAL_LISTEN")) detail::split_listen(v, c);
    str("CURSAL_ASSET_DIR", c.asset_dir);
    str("CURSAL_DATA_DIR", c.data_dir);
    str("CURSAL_CATALOG", c.catalog_path);
    str("CURSAL_SECRET", c.secret);
    str("CURSAL_ADMIN_TOKEN", c.admin_token);
    str("CURSAL_WEBHOOK_URL", c.webhook_url);
    str("CURSAL_WEB_DIR", c.web_dir);
    num("CURSAL_PLAYLIST_SIZE", c.playlist_size);
    num("CURSAL_MIN_SCREEN_WIDTH", c.min_screen_width);
    num("CURSAL_MIN_FPS", c.min_fps);
    num("CURSAL_SIGMA1_FRAC", c.foveation.sigma1_frac);
    num("CURSAL_SIGMAW_FRAC", c.foveation.sigmaw_frac);
    if (const char* v = env("CURSAL_SEED")) {
        try {
            c.seed = std::stoull(v);
        } catch (const std::exception&) {
            throw ParameterError("bad numeric value in CURSAL_SEED");
        }
    }
}

/// Config file (optional, JSON) overlaid with the environment.
inline ServiceConfig load_config(const std::string& path, const EnvLookup& env = [](const char* k) {
    return std::getenv(k);
}) {
    ServiceConfig c;
    if (!path.empty()) {
        std::ifstream is(path);
        if (!is) throw IoError("cannot open config " + path);
        nlohmann::json j;
        try {
            is >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(0, path + ": " + e.what());
        }
        apply_json(c, j);
    }
    apply_env(c, env);
    c.validate();
    return c;
}

} // namespace cursal::service
