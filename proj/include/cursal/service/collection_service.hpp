#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cursal/core/random.hpp"
#include "cursal/io/catalog.hpp"
#include "cursal/io/trace_format.hpp"
#include "cursal/service/allocation.hpp"
#include "cursal/service/completion.hpp"
#include "cursal/service/config.hpp"
#include "cursal/service/errors.hpp"
#include "cursal/service/storage.hpp"

namespace cursal::service {

using io::VideoCatalogEntry;

struct Capability {
    int screen_width = 0;
    int screen_height = 0;
    double measured_fps = 0.0;
};

enum class SessionStatus { active, completed, excluded };

inline std::string to_string(SessionStatus s) {
    switch (s) {
    case SessionStatus::active: return "active";
    case SessionStatus::completed: return "completed";
    case SessionStatus::excluded: return "excluded";
    }
    return "active";
}

inline SessionStatus status_from_string(const std::string& s) {
    if (s == "completed") return SessionStatus::completed;
    if (s == "excluded") return SessionStatus::excluded;
    if (s == "active") return SessionStatus::active;
    throw ParseError(0, "unknown session status '" + s + "'");
}

struct SessionRecord {
    std::string session_id;
    std::int64_t created_at_ms = 0;
    int screen_width = 0;
    int screen_height = 0;
    double measured_fps = 0.0;
    std::vector<std::string> playlist;
    std::set<std::string> completed_videos;
    SessionStatus status = SessionStatus::active;
    std::optional<std::string> completion_code;
    std::string exclusion_reason;

    friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

inline nlohmann::json to_json(const SessionRecord& s) {
    nlohmann::json j{{"session_id", s.session_id},
                     {"created_at_ms", s.created_at_ms},
                     {"screen_width", s.screen_width},
                     {"screen_height", s.screen_height},
                     {"measured_fps", s.measured_fps},
                     {"playlist", s.playlist},
                     {"completed_videos", s.completed_videos},
                     {"status", to_string(s.status)},
                     {"completion_code", nullptr}};
    if (s.completion_code) j["completion_code"] = *s.completion_code;
    if (!s.exclusion_reason.empty()) j["exclusion_reason"] = s.exclusion_reason;
    return j;
}

inline SessionRecord session_from_json(const nlohmann::json& j) {
    SessionRecord s;
    s.session_id = j.at("session_id").get<std::string>();
    s.created_at_ms = j.at("created_at_ms").get<std::int64_t>();
    s.screen_width = j.at("screen_width").get<int>();
    s.screen_height = j.at("screen_height").get<int>();
    s.measured_fps = j.at("measured_fps").get<double>();
    s.playlist = j.at("playlist").get<std::vector<std::string>>();
    s.completed_videos = j.at("completed_videos").get<std::set<std::string>>();
    s.status = status_from_string(j.at("status").get<std::string>());
    if (!j.at("completion_code").is_null()) s.completion_code = j.at("completion_code").get<std::string>();
    s.exclusion_reason = j.value("exclusion_reason", std::string());
    return s;
}

struct TimedPoint {
    std::int64_t t_ms = 0;
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const TimedPoint&, const TimedPoint&) = default;
};

struct TraceUpload {
    std::string session_id;
    std::string video_id;
    std::vector<TimedPoint> samples;
    double client_fps_report = 0.0;
};

struct IngestAck {
    bool accepted = false;
    int samples_stored = 0;
    bool duplicate = false;
};

struct StoredTrace {
    std::string session_id;
    std::string video_id;
    std::vector<TimedPoint> samples;
    double client_fps_report = 0.0;
    std::int64_t received_at_ms = 0;
    int upload_count = 1;
};

struct ExportedDataset {
    std::vector<FixationTrace> traces; // grouped by video, then observer
    nlohmann::json manifest;

    std::string trace_text() const {
        std::ostringstream os;
        io::write_traces(os, traces);
        return os.str();
    }
};

/// Called after a session completes, outside the service lock.
using CompletionHook = std::function<void(const SessionRecord&)>;

/// Participant sessions, playlist allocation, trace ingestion and export.
///
/// All state transitions and catalog view-count updates go through one
/// exclusive lock, and each is written to the append-only log before it
/// becomes visible. Upload validation runs before the lock is taken.
class CollectionService {
public:
    CollectionService(ServiceConfig config, std::vector<VideoCatalogEntry> catalog, CompletionHook hook = {})
        : config_(std::move(config)), catalog_(std::move(catalog)), hook_(std::move(hook)),
          rng_(config_.seed ? *config_.seed : std::random_device{}() ^ (std::uint64_t{std::random_device{}()} << 32)) {
        for (std::size_t i = 0; i < catalog_.size(); ++i) {
            io::validate(catalog_[i]);
            if (!catalog_index_.emplace(catalog_[i].video_id, i).second) {
                throw ParameterError("duplicate video_id " + catalog_[i].video_id + " in catalog");
            }
        }
        std::filesystem::create_directories(config_.data_dir);
        secret_ = config_.secret.empty() ? load_or_create_secret() : config_.secret;
        log_.open(std::filesystem::path(config_.data_dir) / "log.jsonl",
                  [this](const nlohmann::json& rec) { replay(rec); }, config_.fsync);
    }

    const ServiceConfig& config() const { return config_; }

    bool passes_checks(const Capability& cap) const {
        return cap.screen_width >= config_.min_screen_width && cap.measured_fps >= config_.min_fps;
    }

    SessionRecord create_session(const Capability& cap, std::optional<int> playlist_size = {}) {
        const int size = playlist_size.value_or(config_.playlist_size);
        if (size < 1) throw ParameterError("playlist size must be at least 1");
        std::unique_lock lock(mu_);
        if (catalog_.empty()) throw ServiceStateError("video catalog is empty");

        SessionRecord s;
        s.session_id = new_session_id();
        s.created_at_ms = now_ms();
        s.screen_width = cap.screen_width;
        s.screen_height = cap.screen_height;
        s.measured_fps = cap.measured_fps;
        if (!passes_checks(cap)) {
            s.status = SessionStatus::excluded;
            s.exclusion_reason = exclusion_reason(cap);
        } else {
            std::vector<VideoLoad> loads;
            loads.reserve(catalog_.size());
            for (const auto& e : catalog_) loads.push_back({e.video_id, e.view_count});
            s.playlist = allocate_playlist(loads, size, rng_.next());
        }
        log_.append({{"type", "session"}, {"session", to_json(s)}});
        apply_session(s);
        return s;
    }

    SessionRecord session(const std::string& id) const {
        std::shared_lock lock(mu_);
        return find_session(id);
    }

    std::vector<VideoCatalogEntry> playlist(const std::string& id) const {
        std::shared_lock lock(mu_);
        const SessionRecord& s = find_session(id);
        std::vector<VideoCatalogEntry> out;
        for (const auto& v : s.playlist) out.push_back(catalog_[catalog_index_.at(v)]);
        return out;
    }

    std::vector<VideoCatalogEntry> catalog() const {
        std::shared_lock lock(mu_);
        return catalog_;
    }

    std::optional<VideoCatalogEntry> video(const std::string& id) const {
        std::shared_lock lock(mu_);
        const auto it = catalog_index_.find(id);
        if (it == catalog_index_.end()) return std::nullopt;
        return catalog_[it->second];
    }

    IngestAck ingest_trace(const TraceUpload& up) {
        // Content checks need only the catalog, which is fixed after construction.
        const auto cat = catalog_index_.find(up.video_id);
        if (cat != catalog_index_.end()) validate_samples(up, catalog_[cat->second]);

        std::unique_lock lock(mu_);
        SessionRecord& s = find_session(up.session_id);
        if (s.status == SessionStatus::excluded) {
            throw RejectedError("session " + s.session_id + " is excluded from data collection" +
                                (s.exclusion_reason.empty() ? "" : ": " + s.exclusion_reason));
        }
        if (s.status == SessionStatus::completed) {
            throw PreconditionError("session " + s.session_id + " is already completed");
        }
        if (std::find(s.playlist.begin(), s.playlist.end(), up.video_id) == s.playlist.end()) {
            throw ValidationError("video " + up.video_id + " is not in the playlist of session " + s.session_id,
                                  up.video_id);
        }

        StoredTrace t;
        t.session_id = up.session_id;
        t.video_id = up.video_id;
        t.samples = up.samples;
        t.client_fps_report = up.client_fps_report;
        t.received_at_ms = now_ms();
        const auto existing = traces_.find({t.session_id, t.video_id});
        const bool duplicate = existing != traces_.end();
        t.upload_count = duplicate ? existing->second.upload_count + 1 : 1;

        log_.append(trace_record(t));
        const int stored = static_cast<int>(t.samples.size());
        apply_trace(std::move(t));
        return {true, stored, duplicate};
    }

    /// Issues the completion code. Idempotent for completed sessions.
    std::string complete_session(const std::string& id) {
        SessionRecord done;
        {
            std::unique_lock lock(mu_);
            SessionRecord& s = find_session(id);
            if (s.status == SessionStatus::completed) return *s.completion_code;
            if (s.status == SessionStatus::excluded) {
                throw RejectedError("session " + id + " is excluded from data collection");
            }
            std::vector<std::string> missing;
            for (const auto& v : s.playlist) {
                if (!s.completed_videos.count(v)) missing.push_back(v);
            }
            if (!missing.empty()) {
                std::string list;
                for (const auto& m : missing) list += (list.empty() ? "" : ",") + m;
                throw PreconditionError(std::to_string(missing.size()) + " playlist video(s) have no trace", list);
            }
            const std::string code = completion_code(secret_, id);
            log_.append({{"type", "complete"}, {"session_id", id}, {"completion_code", code}});
            s.status = SessionStatus::completed;
            s.completion_code = code;
            done = s;
        }
        if (hook_) hook_(done);
        return *done.completion_code;
    }

    /// Post-hoc exclusion (e.g. the client's frame rate collapsed during
    /// playback). Traces stay stored but leave default exports.
    void exclude_session(const std::string& id, const std::string& reason) {
        std::unique_lock lock(mu_);
        SessionRecord& s = find_session(id);
        log_.append({{"type", "exclude"}, {"session_id", id}, {"reason", reason}});
        s.status = SessionStatus::excluded;
        s.completion_code.reset();
        s.exclusion_reason = reason;
    }

    ExportedDataset export_dataset(bool include_excluded = false) const {
        std::shared_lock lock(mu_);
        ExportedDataset out;
        std::map<std::string, std::vector<const StoredTrace*>> by_video;
        for (const auto& [key, t] : traces_) by_video[key.second].push_back(&t);

        nlohmann::json videos = nlohmann::json::array();
        for (auto& [vid, list] : by_video) {
            std::sort(list.begin(), list.end(),
                      [](const StoredTrace* a, const StoredTrace* b) { return a->session_id < b->session_id; });
            int observers = 0;
            nlohmann::json excluded = nlohmann::json::array();
            for (const StoredTrace* t : list) {
                const SessionRecord& s = sessions_.at(t->session_id);
                const bool is_excluded = s.status == SessionStatus::excluded;
                if (is_excluded && !include_excluded) continue;
                if (is_excluded) excluded.push_back(t->session_id);
                ++observers;
                FixationTrace ft{t->session_id, vid, Source::mouse, {}};
                ft.samples.reserve(t->samples.size());
                for (const auto& p : t->samples) {
                    ft.samples.push_back({t->session_id, vid, p.t_ms, p.x, p.y, Source::mouse});
                }
                out.traces.push_back(std::move(ft));
            }
            if (observers > 0) {
                videos.push_back({{"video_id", vid}, {"observers", observers}, {"excluded_observers", excluded}});
            }
        }
        nlohmann::json sessions = nlohmann::json::array();
        for (const auto& [id, s] : sessions_) {
            if (s.status == SessionStatus::excluded && !include_excluded) continue;
            nlohmann::json dups = nlohmann::json::array();
            for (const auto& v : s.playlist) {
                const auto it = traces_.find({id, v});
                if (it != traces_.end() && it->second.upload_count > 1) dups.push_back(v);
            }
            sessions.push_back({{"session_id", id},
                                {"status", to_string(s.status)},
                                {"excluded", s.status == SessionStatus::excluded},
                                {"duplicate_uploads", dups}});
        }
        out.manifest = {{"include_excluded", include_excluded}, {"videos", videos}, {"sessions", sessions}};
        return out;
    }

    /// Rewrites the log to current state: one record per session and the
    /// latest trace per (session, video).
    void compact() {
        std::unique_lock lock(mu_);
        std::vector<nlohmann::json> records;
        for (const auto& [id, s] : sessions_) records.push_back({{"type", "session"}, {"session", to_json(s)}});
        for (const auto& [key, t] : traces_) records.push_back(trace_record(t));
        log_.compact(records);
    }

    void flush() {
        std::unique_lock lock(mu_);
        log_.flush();
    }

    std::size_t session_count() const {
        std::shared_lock lock(mu_);
        return sessions_.size();
    }

    std::optional<StoredTrace> stored_trace(const std::string& session_id, const std::string& video_id) const {
        std::shared_lock lock(mu_);
        const auto it = traces_.find({session_id, video_id});
        if (it == traces_.end()) return std::nullopt;
        return it->second;
    }

    std::filesystem::path log_path() const { return log_.path(); }

private:
    static std::int64_t now_ms() {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }

    std::string exclusion_reason(const Capability& cap) const {
        std::string r;
        if (cap.screen_width < config_.min_screen_width) {
            r = "screen width " + std::to_string(cap.screen_width) + " < " + std::to_string(config_.min_screen_width);
        }
        if (cap.measured_fps < config_.min_fps) {
            if (!r.empty()) r += "; ";
            r += "render rate " + io::format_fixed(cap.measured_fps, 2) + " fps < " +
                 io::format_fixed(config_.min_fps, 2);
        }
        return r;
    }

    std::string new_session_id() {
        static constexpr char hex[] = "0123456789abcdef";
        for (;;) {
            std::string id;
            for (int w = 0; w < 2; ++w) {
                std::uint64_t v = rng_.next();
                for (int i = 0; i < 16; ++i, v >>= 4) id.push_back(hex[v & 0xf]);
            }
            if (!sessions_.count(id)) return id;
        }
    }

    std::string load_or_create_secret() {
        const auto path = std::filesystem::path(config_.data_dir) / "secret";
        if (std::filesystem::exists(path)) {
            std::ifstream is(path);
            std::string s;
            std::getline(is, s);
            if (!s.empty()) return s;
        }
        std::random_device rd;
        static constexpr char hex[] = "0123456789abcdef";
        std::string s;
        for (int i = 0; i < 64; ++i) s.push_back(hex[rd() & 0xf]);
        std::ofstream os(path);
        if (!os) throw IoError("cannot write " + path.string());
        os << s << '\n';
        return s;
    }

    static void validate_samples(const TraceUpload& up, const VideoCatalogEntry& video) {
        for (std::size_t i = 0; i < up.samples.size(); ++i) {
            const auto& p = up.samples[i];
            const std::string where = "sample " + std::to_string(i);
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || !in_unit_square(p.x, p.y)) {
                throw ValidationError(where + " has coordinates outside [0,1]",
                                      where + ": x=" + io::format_coord(p.x) + " y=" + io::format_coord(p.y));
            }
            if (p.t_ms < 0 || p.t_ms > video.duration_ms) {
                throw ValidationError(where + " has t_ms outside the video", where + ": t_ms=" + std::to_string(p.t_ms));
            }
            if (i > 0 && p.t_ms < up.samples[i - 1].t_ms) {
                throw ValidationError(where + " goes back in time", where + ": t_ms=" + std::to_string(p.t_ms));
            }
        }
        if (!std::isfinite(up.client_fps_report) || up.client_fps_report < 0.0) {
            throw ValidationError("client_fps_report must be a non-negative number");
        }
    }

    static nlohmann::json trace_record(const StoredTrace& t) {
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& p : t.samples) samples.push_back({p.t_ms, p.x, p.y});
        return {{"type", "trace"},
                {"session_id", t.session_id},
                {"video_id", t.video_id},
                {"client_fps_report", t.client_fps_report},
                {"received_at_ms", t.received_at_ms},
                {"upload_count", t.upload_count},
                {"samples", samples}};
    }

    SessionRecord& find_session(const std::string& id) {
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
        return it->second;
    }
    const SessionRecord& find_session(const std::string& id) const {
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
        return it->second;
    }

    void apply_session(const SessionRecord& s) {
        const bool fresh = !sessions_.count(s.session_id);
        if (fresh) {
            for (const auto& v : s.playlist) {
                const auto it = catalog_index_.find(v);
                if (it != catalog_index_.end()) ++catalog_[it->second].view_count;
            }
        }
        sessions_[s.session_id] = s;
    }

    void apply_trace(StoredTrace t) {
        auto it = sessions_.find(t.session_id);
        if (it != sessions_.end()) it->second.completed_videos.insert(t.video_id);
        const auto key = std::make_pair(t.session_id, t.video_id);
        traces_[key] = std::move(t);
    }

    void replay(const nlohmann::json& rec) {
        try {
            const std::string type = rec.at("type").get<std::string>();
            if (type == "session") {
                apply_session(session_from_json(rec.at("session")));
            } else if (type == "trace") {
                StoredTrace t;
                t.session_id = rec.at("session_id").get<std::string>();
                t.video_id = rec.at("video_id").get<std::string>();
                t.client_fps_report = rec.at("client_fps_report").get<double>();
                t.received_at_ms = rec.at("received_at_ms").get<std::int64_t>();
                t.upload_count = rec.value("upload_count", 1);
                for (const auto& p : rec.at("samples")) {
                    t.samples.push_back({p.at(0).get<std::int64_t>(), p.at(1).get<double>(), p.at(2).get<double>()});
                }
                apply_trace(std::move(t));
            } else if (type == "complete") {
                auto& s = sessions_.at(rec.at("session_id").get<std::string>());
                s.status = SessionStatus::completed;
                s.completion_code = rec.at("completion_code").get<std::string>();
            } else if (type == "exclude") {
                auto& s = sessions_.at(rec.at("session_id").get<std::string>());
                s.status = SessionStatus::excluded;
                s.completion_code.reset();
                s.exclusion_reason = rec.at("reason").get<std::string>();
            }
        } catch (const std::exception& e) {
            throw ParseError(0, std::string("corrupt log record: ") + e.what());
        }
    }

    ServiceConfig config_;
    std::vector<VideoCatalogEntry> catalog_;
    std::map<std::string, std::size_t> catalog_index_;
    CompletionHook hook_;
    Rng rng_;
    std::string secret_;
    AppendLog log_;
    std::map<std::string, SessionRecord> sessions_;
    std::map<std::pair<std::string, std::string>, StoredTrace> traces_;
    mutable std::shared_mutex mu_;
};

} // namespace cursal::service
