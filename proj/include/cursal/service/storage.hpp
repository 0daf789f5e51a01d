#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "cursal/error.hpp"

namespace cursal::service {

/// Append-only JSON-lines log. Each record is one line; a torn final line
/// left by a crash is cut off when the log is reopened. compact() swaps in
/// a rewritten log atomically via rename.
class AppendLog {
public:
    AppendLog() = default;
    AppendLog(const AppendLog&) = delete;
    AppendLog& operator=(const AppendLog&) = delete;
    ~AppendLog() { close(); }

    /// Opens (creating if needed) the log at `path`, feeding every intact
    /// record to `replay` in file order.
    void open(const std::filesystem::path& path, const std::function<void(const nlohmann::json&)>& replay,
              bool fsync_each = false) {
        close();
        path_ = path;
        fsync_ = fsync_each;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());

        std::uintmax_t good_end = 0;
        if (std::filesystem::exists(path)) {
            std::ifstream is(path, std::ios::binary);
            std::string line;
            std::uintmax_t offset = 0;
            while (std::getline(is, line)) {
                const bool terminated = !is.eof();
                const std::uintmax_t next = offset + line.size() + (terminated ? 1 : 0);
                if (!terminated) break;
                nlohmann::json rec;
                try {
                    rec = nlohmann::json::parse(line);
                } catch (const nlohmann::json::exception&) {
                    break;
                }
                replay(rec);
                good_end = next;
                offset = next;
            }
            is.close();
            if (std::filesystem::file_size(path) != good_end) {
                torn_bytes_ = std::filesystem::file_size(path) - good_end;
                std::filesystem::resize_file(path, good_end);
            }
        }
        file_ = std::fopen(path.c_str(), "ab");
        if (!file_) throw IoError("cannot open log " + path.string());
    }

    void append(const nlohmann::json& record) {
        if (!file_) throw IoError("log is not open");
        const std::string line = record.dump() + "\n";
        if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0) {
            throw IoError("write to " + path_.string() + " failed");
        }
        if (fsync_) ::fsync(fileno(file_));
    }

    /// Replaces the log with `records`.
    void compact(const std::vector<nlohmann::json>& records) {
        const auto tmp = std::filesystem::path(path_.string() + ".compact");
        {
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            if (!os) throw IoError("cannot write " + tmp.string());
            for (const auto& r : records) os << r.dump() << '\n';
            os.flush();
            if (!os) throw IoError("write to " + tmp.string() + " failed");
        }
        close();
        std::filesystem::rename(tmp, path_);
        file_ = std::fopen(path_.c_str(), "ab");
        if (!file_) throw IoError("cannot reopen log " + path_.string());
    }

    void flush() {
        if (file_) {
            std::fflush(file_);
            ::fsync(fileno(file_));
        }
    }

    void close() {
        if (file_) {
            std::fflush(file_);
            std::fclose(file_);
            file_ = nullptr;
        }
    }

    const std::filesystem::path& path() const { return path_; }
    std::uintmax_t torn_bytes() const { return torn_bytes_; }

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
    bool fsync_ = false;
    std::uintmax_t torn_bytes_ = 0;
};

} // namespace cursal::service
