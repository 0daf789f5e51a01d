#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cursal/service/collection_service.hpp"

namespace cursal::service {

/// Fire-and-forget POST of completion events to a webhook. Deliveries run
/// on one worker thread; failures are logged and dropped.
class WebhookNotifier {
public:
    explicit WebhookNotifier(std::string url) : url_(std::move(url)), worker_([this] { run(); }) {}
    WebhookNotifier(const WebhookNotifier&) = delete;
    WebhookNotifier& operator=(const WebhookNotifier&) = delete;

    ~WebhookNotifier() {
        {
            std::lock_guard lock(mu_);
            stop_ = true;
        }
        cv_.notify_one();
        worker_.join();
    }

    void notify(const SessionRecord& s) {
        nlohmann::json body{{"event", "session_completed"},
                            {"session_id", s.session_id},
                            {"completion_code", s.completion_code.value_or("")}};
        {
            std::lock_guard lock(mu_);
            queue_.push_back(body.dump());
        }
        cv_.notify_one();
    }

private:
    void run() {
        for (;;) {
            std::string body;
            {
                std::unique_lock lock(mu_);
                cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
                if (queue_.empty()) return;
                body = std::move(queue_.front());
                queue_.pop_front();
            }
            deliver(body);
        }
    }

    void deliver(const std::string& body) {
        // url_ = scheme://host[:port]/path
        const auto scheme_end = url_.find("://");
        const auto path_start = url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        const std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);
        httplib::Client cli(base);
        cli.set_connection_timeout(3);
        cli.set_read_timeout(3);
        const auto res = cli.Post(path, body, "application/json");
        if (!res || res->status >= 300) {
            std::cerr << "webhook " << url_ << " failed: "
                      << (res ? std::to_string(res->status) : httplib::to_string(res.error())) << '\n';
        } else {
            std::cerr << "webhook " << url_ << " delivered\n";
        }
    }

    std::string url_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::string> queue_;
    bool stop_ = false;
    std::thread worker_;
};

namespace detail {

inline int http_status(const Error& e) {
    const std::string& c = e.code();
    if (c == "not_found") return 404;
    if (c == "validation_error") return 422;
    if (c == "session_excluded") return 403;
    if (c == "precondition_failed") return 409;
    if (c == "unauthorized") return 401;
    if (c == "service_state") return 503;
    if (c == "parameter_error" || c == "parse_error") return 400;
    return 500;
}

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

inline void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                       const std::string& detail = {}) {
    send_json(res, status, {{"code", code}, {"message", message}, {"detail", detail}});
}

inline nlohmann::json parse_body(const httplib::Request& req) {
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("request body is not valid JSON: ") + e.what());
    }
}

inline TraceUpload upload_from_json(const std::string& session_id, const nlohmann::json& j) {
    TraceUpload up;
    up.session_id = session_id;
    try {
        up.video_id = j.at("video_id").get<std::string>();
        up.client_fps_report = j.value("client_fps_report", 0.0);
        for (const auto& s : j.at("samples")) {
            if (s.is_array()) {
                up.samples.push_back({s.at(0).get<std::int64_t>(), s.at(1).get<double>(), s.at(2).get<double>()});
            } else {
                up.samples.push_back({s.at("t_ms").get<std::int64_t>(), s.at("x").get<double>(), s.at("y").get<double>()});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("malformed trace upload: ") + e.what());
    }
    return up;
}

inline nlohmann::json video_json(const VideoCatalogEntry& e) {
    return {{"video_id", e.video_id},       {"width", e.width},
            {"height", e.height},           {"fps", e.fps},
            {"duration_ms", e.duration_ms}, {"n_frames", e.n_frames},
            {"url", "/api/video/" + e.video_id}};
}

inline std::string mime_for(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".mp4" || ext == ".m4v") return "video/mp4";
    if (ext == ".webm") return "video/webm";
    if (ext == ".ogv") return "video/ogg";
    return "application/octet-stream";
}

} // namespace detail

/// HTTP/JSON front of a CollectionService.
///
///   GET  /api/health
///   POST /api/session                  capability report -> session
///   GET  /api/session/{id}
///   GET  /api/session/{id}/playlist
///   GET  /api/video/{id}               asset bytes, Range supported
///   POST /api/session/{id}/trace       trace upload -> ack
///   POST /api/session/{id}/complete    -> completion code
///   POST /api/session/{id}/exclude     admin
///   GET  /api/export                   admin, ?include_excluded=true
///
/// Errors are {code, message, detail}. Admin calls need
/// "Authorization: Bearer <admin_token>".
class HttpApi {
public:
    explicit HttpApi(CollectionService& service) : service_(service) { routes(); }

    httplib::Server& server() { return server_; }

    /// Binds the configured address; returns the bound port or -1.
    int bind() {
        const auto& c = service_.config();
        if (c.port == 0) return server_.bind_to_any_port(c.host);
        return server_.bind_to_port(c.host, c.port) ? c.port : -1;
    }

    bool listen_after_bind() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    void wait_until_ready() const { server_.wait_until_ready(); }

private:
    template <class F>
    httplib::Server::Handler guarded(F f) {
        return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const ValidationError& e) {
                detail::send_error(res, detail::http_status(e), e.code(), e.what(), e.detail());
            } catch (const PreconditionError& e) {
                detail::send_error(res, detail::http_status(e), e.code(), e.what(), e.detail());
            } catch (const Error& e) {
                detail::send_error(res, detail::http_status(e), e.code(), e.what());
            } catch (const std::exception& e) {
                detail::send_error(res, 500, "internal_error", e.what());
            }
        };
    }

    void require_admin(const httplib::Request& req) const {
        const std::string& token = service_.config().admin_token;
        if (token.empty()) throw UnauthorizedError("admin endpoints are disabled (no admin_token configured)");
        if (req.get_header_value("Authorization") != "Bearer " + token) {
            throw UnauthorizedError("missing or wrong admin token");
        }
    }

    void routes() {
        server_.Get("/api/health", guarded([this](const httplib::Request&, httplib::Response& res) {
            detail::send_json(res, 200, {{"status", "ok"}, {"sessions", service_.session_count()}});
        }));

        server_.Post("/api/session", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto j = detail::parse_body(req);
            Capability cap;
            try {
                cap.screen_width = j.at("screen_width").get<int>();
                cap.screen_height = j.value("screen_height", 0);
                cap.measured_fps = j.at("measured_fps").get<double>();
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(0, std::string("malformed capability report: ") + e.what());
            }
            const SessionRecord s = service_.create_session(cap);
            auto body = to_json(s);
            body["foveation"] = foveation_json();
            detail::send_json(res, 201, body);
        }));

        server_.Get(R"(/api/session/([0-9a-f]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            detail::send_json(res, 200, to_json(service_.session(req.matches[1])));
        }));

        server_.Get(R"(/api/session/([0-9a-f]+)/playlist)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const SessionRecord s = service_.session(req.matches[1]);
                        nlohmann::json videos = nlohmann::json::array();
                        for (const auto& e : service_.playlist(s.session_id)) videos.push_back(detail::video_json(e));
                        detail::send_json(res, 200,
                                          {{"session_id", s.session_id},
                                           {"status", to_string(s.status)},
                                           {"playlist", videos},
                                           {"completed_videos", s.completed_videos},
                                           {"foveation", foveation_json()}});
                    }));

        server_.Get(R"(/api/video/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto v = service_.video(id);
            if (!v) throw NotFoundError("unknown video " + id);
            const auto path = std::filesystem::path(service_.config().asset_dir) / v->asset_path;
            if (v->asset_path.empty() || !std::filesystem::is_regular_file(path)) {
                throw NotFoundError("asset for video " + id + " is missing");
            }
            const auto size = static_cast<std::size_t>(std::filesystem::file_size(path));
            auto file = std::make_shared<std::ifstream>(path, std::ios::binary);
            res.set_content_provider(size, detail::mime_for(path),
                                     [file](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
                                         std::vector<char> buf(std::min<std::size_t>(length, 1 << 16));
                                         file->seekg(static_cast<std::streamoff>(offset));
                                         file->read(buf.data(), static_cast<std::streamsize>(buf.size()));
                                         const auto got = static_cast<std::size_t>(file->gcount());
                                         if (got == 0) return false;
                                         return sink.write(buf.data(), got);
                                     });
        }));

        server_.Post(R"(/api/session/([0-9a-f]+)/trace)",
                     guarded([this](const httplib::Request& req, httplib::Response& res) {
                         const auto up = detail::upload_from_json(req.matches[1], detail::parse_body(req));
                         const IngestAck ack = service_.ingest_trace(up);
                         detail::send_json(res, 200,
                                           {{"accepted", ack.accepted},
                                            {"samples_stored", ack.samples_stored},
                                            {"duplicate", ack.duplicate}});
                     }));

        server_.Post(R"(/api/session/([0-9a-f]+)/complete)",
                     guarded([this](const httplib::Request& req, httplib::Response& res) {
                         const std::string code = service_.complete_session(req.matches[1]);
                         detail::send_json(res, 200, {{"session_id", std::string(req.matches[1])}, {"completion_code", code}});
                     }));

        server_.Post(R"(/api/session/([0-9a-f]+)/exclude)",
                     guarded([this](const httplib::Request& req, httplib::Response& res) {
                         require_admin(req);
                         std::string reason = "excluded by administrator";
                         if (!req.body.empty()) reason = detail::parse_body(req).value("reason", reason);
                         service_.exclude_session(req.matches[1], reason);
                         detail::send_json(res, 200, to_json(service_.session(req.matches[1])));
                     }));

        server_.Get("/api/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
            require_admin(req);
            const bool include = req.get_param_value("include_excluded") == "true";
            const ExportedDataset d = service_.export_dataset(include);
            detail::send_json(res, 200, {{"manifest", d.manifest}, {"traces", d.trace_text()}});
        }));

        if (!service_.config().web_dir.empty()) server_.set_mount_point("/", service_.config().web_dir);
    }

    nlohmann::json foveation_json() const {
        const auto& f = service_.config().foveation;
        return {{"sigma1_frac", f.sigma1_frac}, {"sigmaw_frac", f.sigmaw_frac}};
    }

    CollectionService& service_;
    httplib::Server server_;
};

} // namespace cursal::service
