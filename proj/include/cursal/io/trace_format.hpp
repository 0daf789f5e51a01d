#pragma once

// Line-oriented fixation trace files:
//
//   # comment
//   <video_id> <observer_id> <mouse|eye> <t_ms> <x> <y>
//
// Fields are separated by blanks; x and y are written with six decimals.

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cursal/core/subsample.hpp"
#include "cursal/core/types.hpp"

namespace cursal::io {

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    return std::string(buf, r.ptr);
}

inline std::string format_coord(double v) { return format_fixed(v, 6); }

inline void write_trace_line(std::ostream& os, const FixationSample& s) {
    os << s.video_id << ' ' << s.observer_id << ' ' << to_string(s.source) << ' ' << s.t_ms << ' '
       << format_coord(s.x) << ' ' << format_coord(s.y) << '\n';
}

inline void write_traces(std::ostream& os, const std::vector<FixationTrace>& traces, bool with_header = true) {
    if (with_header) os << "# video_id observer_id source t_ms x y\n";
    for (const auto& t : traces) {
        for (const auto& s : t.samples) write_trace_line(os, s);
    }
}

namespace detail {

inline std::vector<std::string_view> split_blank(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <class T>
bool parse_number(std::string_view text, T& out) {
    const char* end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, out);
    return r.ec == std::errc{} && r.ptr == end;
}

} // namespace detail

/// Parses a whole trace file. Samples are grouped into one trace per
/// (video, observer, source), in order of first appearance. Throws ParseError
/// naming the offending line.
inline std::vector<FixationTrace> parse_traces(std::istream& is) {
    std::vector<FixationTrace> traces;
    std::map<std::tuple<std::string, std::string, Source>, std::size_t> index;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto fields = detail::split_blank(line);
        if (fields.empty() || fields[0].front() == '#') continue;
        if (fields.size() != 6) {
            throw ParseError(lineno, "expected 6 fields (video_id observer_id source t_ms x y), got " +
                                         std::to_string(fields.size()));
        }
        FixationSample s;
        s.video_id = std::string(fields[0]);
        s.observer_id = std::string(fields[1]);
        if (!parse_source(fields[2], s.source)) {
            throw ParseError(lineno, "unknown source '" + std::string(fields[2]) + "'");
        }
        if (!detail::parse_number(fields[3], s.t_ms) || s.t_ms < 0) {
            throw ParseError(lineno, "t_ms must be a non-negative integer");
        }
        if (!detail::parse_number(fields[4], s.x) || !detail::parse_number(fields[5], s.y)) {
            throw ParseError(lineno, "x and y must be numbers");
        }
        if (!in_unit_square(s.x, s.y)) throw ParseError(lineno, "coordinates outside [0,1]");

        const auto key = std::make_tuple(s.video_id, s.observer_id, s.source);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, traces.size()).first;
            traces.push_back(FixationTrace{s.observer_id, s.video_id, s.source, {}});
        }
        auto& trace = traces[it->second];
        if (!trace.samples.empty() && s.t_ms < trace.samples.back().t_ms) {
            throw ParseError(lineno, "t_ms goes backwards within trace " + s.video_id + "/" + s.observer_id);
        }
        trace.samples.push_back(std::move(s));
    }
    return traces;
}

inline std::vector<FixationTrace> parse_traces(const std::string& text) {
    std::istringstream is(text);
    return parse_traces(is);
}

inline std::vector<FixationTrace> load_traces(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open trace file " + path);
    return parse_traces(is);
}

/// Traces of one source grouped by observer.
inline ObserverTraces by_observer(const std::vector<FixationTrace>& traces, Source source) {
    ObserverTraces out;
    for (const auto& t : traces) {
        if (t.source == source) out[t.observer_id].push_back(t);
    }
    return out;
}

} // namespace cursal::io
