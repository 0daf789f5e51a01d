#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "cursal/core/random.hpp"
#include "cursal/error.hpp"

namespace cursal::service {

struct VideoLoad {
    std::string video_id;
    int view_count = 0;
};

/// Least-viewed-first playlist. Ties in view count are broken uniformly at
/// random, and the chosen videos are returned in random order.
inline std::vector<std::string> allocate_playlist(const std::vector<VideoLoad>& catalog, int playlist_size,
                                                  std::uint64_t rng_seed) {
    if (playlist_size < 1) throw ParameterError("playlist size must be at least 1");
    if (static_cast<std::size_t>(playlist_size) > catalog.size()) {
        throw ParameterError("playlist size " + std::to_string(playlist_size) + " exceeds catalog size " +
                             std::to_string(catalog.size()));
    }
    Rng rng(rng_seed);
    std::vector<VideoLoad> order = catalog;
    rng.shuffle(order);
    std::stable_sort(order.begin(), order.end(),
                     [](const VideoLoad& a, const VideoLoad& b) { return a.view_count < b.view_count; });
    std::vector<std::string> playlist;
    playlist.reserve(static_cast<std::size_t>(playlist_size));
    for (int i = 0; i < playlist_size; ++i) playlist.push_back(order[static_cast<std::size_t>(i)].video_id);
    rng.shuffle(playlist);
    return playlist;
}

} // namespace cursal::service
