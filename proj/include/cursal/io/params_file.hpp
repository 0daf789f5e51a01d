#pragma once

// Postprocess parameter files: one "key value" pair per line, '#' starts a
// comment. Unknown keys are rejected so typos do not silently fall back to
// defaults.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "cursal/io/trace_format.hpp"
#include "cursal/postprocess/transform.hpp"

namespace cursal::io {

inline void write_params(std::ostream& os, const PostprocessParams& p, const double* training_sim = nullptr) {
    os << "# semiautomatic postprocess parameters\n";
    if (training_sim) os << "# training_sim " << format_fixed(*training_sim, 9) << '\n';
    os << "window_k " << p.window_k << '\n'
       << "decay " << format_fixed(p.decay, 6) << '\n'
       << "gamma " << format_fixed(p.gamma, 6) << '\n'
       << "alpha " << format_fixed(p.alpha, 6) << '\n'
       << "beta " << format_fixed(p.beta, 6) << '\n'
       << "center_sigma_frac " << format_fixed(p.center_sigma_frac, 6) << '\n';
}

inline PostprocessParams parse_params(std::istream& is) {
    PostprocessParams p;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto fields = detail::split_blank(line);
        if (fields.empty() || fields[0].front() == '#') continue;
        if (fields.size() != 2) throw ParseError(lineno, "expected 'key value'");
        const std::string key(fields[0]);
        bool ok = true;
        if (key == "window_k") {
            ok = detail::parse_number(fields[1], p.window_k);
        } else if (key == "decay") {
            ok = detail::parse_number(fields[1], p.decay);
        } else if (key == "gamma") {
            ok = detail::parse_number(fields[1], p.gamma);
        } else if (key == "alpha") {
            ok = detail::parse_number(fields[1], p.alpha);
        } else if (key == "beta") {
            ok = detail::parse_number(fields[1], p.beta);
        } else if (key == "center_sigma_frac") {
            ok = detail::parse_number(fields[1], p.center_sigma_frac);
        } else {
            throw ParseError(lineno, "unknown key '" + key + "'");
        }
        if (!ok) throw ParseError(lineno, "bad value for " + key);
    }
    try {
        p.validate();
    } catch (const ParameterError& e) {
        throw ParseError(0, e.what());
    }
    return p;
}

inline PostprocessParams load_params(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open params file " + path);
    return parse_params(is);
}

inline void save_params(const std::string& path, const PostprocessParams& p, const double* training_sim = nullptr) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write params file " + path);
    write_params(os, p, training_sim);
}

} // namespace cursal::io
