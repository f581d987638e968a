#pragma once

// Line-oriented text persistence for DenoiserModel.
//
//   NLDAE-MODEL v1
//   mode nlDAE
//   dims 12 9 12
//   scaler_in <lo> <hi> <a> <b>
//   scaler_out <lo> <hi> <a> <b>
//   layer 0 <w row-major...> <bias...>
//   layer 1 ...
//
// Numbers are written in shortest round-trip decimal form, so a reload
// reproduces every parameter (and therefore every forward output) exactly.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "nldae/denoiser.hpp"
#include "nldae/errors.hpp"

namespace nldae {

inline constexpr std::string_view kModelHeader = "NLDAE-MODEL v1";

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline void write_model(std::ostream& os, const DenoiserModel& m) {
    os << kModelHeader << '\n';
    os << "mode " << to_string(m.mode) << '\n';
    os << "dims";
    for (int d : m.mlp.dims) os << ' ' << d;
    os << '\n';
    auto scaler = [&](const char* name, const AffineScaler& s) {
        os << name << ' ' << format_double(s.lo) << ' ' << format_double(s.hi) << ' ' << format_double(s.a) << ' '
           << format_double(s.b) << '\n';
    };
    scaler("scaler_in", m.scaler_in);
    scaler("scaler_out", m.scaler_out);
    for (std::size_t l = 0; l < m.mlp.num_layers(); ++l) {
        os << "layer " << l;
        const Mat& w = m.mlp.weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) os << ' ' << format_double(w(i, j));
        }
        for (Eigen::Index i = 0; i < m.mlp.biases[l].size(); ++i) os << ' ' << format_double(m.mlp.biases[l][i]);
        os << '\n';
    }
}

inline void save_model(const DenoiserModel& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw LoadError("save_model: cannot open '" + path + "' for writing");
    write_model(os, m);
    if (!os) throw LoadError("save_model: write failed for '" + path + "'");
}

namespace detail {

inline std::vector<std::string> tokens(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(std::move(t));
    return out;
}

}  // namespace detail

inline DenoiserModel read_model(std::istream& is, const std::string& source = "<stream>") {
    std::size_t line_no = 0;
    std::string line;
    auto fail = [&](const std::string& why) -> LoadError {
        return LoadError(source + ":" + std::to_string(line_no) + ": " + why);
    };
    auto next_line = [&](const char* expecting) {
        if (!std::getline(is, line)) {
            throw LoadError(source + ": truncated after line " + std::to_string(line_no) + ", expected " + expecting);
        }
        ++line_no;
        return detail::tokens(line);
    };
    auto number = [&](const std::string& tok) {
        double v = 0.0;
        if (!parse_double(tok, v)) throw fail("malformed number '" + tok + "'");
        return v;
    };

    if (!std::getline(is, line)) throw LoadError(source + ": empty file, expected header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kModelHeader) throw fail("bad header '" + line + "', expected '" + std::string(kModelHeader) + "'");

    DenoiserModel m;
    auto t = next_line("mode");
    if (t.size() != 2 || t[0] != "mode") throw fail("expected 'mode <DAE|nlDAE>'");
    try {
        m.mode = parse_mode(t[1]);
    } catch (const ParameterError& e) {
        throw fail(e.what());
    }

    t = next_line("dims");
    if (t.size() < 3 || t[0] != "dims") throw fail("expected 'dims <w0> <w1> ...'");
    std::vector<int> dims;
    for (std::size_t i = 1; i < t.size(); ++i) {
        int d = 0;
        const auto res = std::from_chars(t[i].data(), t[i].data() + t[i].size(), d);
        if (res.ec != std::errc{} || res.ptr != t[i].data() + t[i].size() || d < 1) throw fail("bad width '" + t[i] + "'");
        dims.push_back(d);
    }

    auto read_scaler = [&](const char* name) {
        auto s = next_line(name);
        if (s.size() != 5 || s[0] != name) throw fail(std::string("expected '") + name + " <lo> <hi> <a> <b>'");
        return AffineScaler{number(s[1]), number(s[2]), number(s[3]), number(s[4])};
    };
    m.scaler_in = read_scaler("scaler_in");
    m.scaler_out = read_scaler("scaler_out");

    Vec flat(static_cast<Eigen::Index>(flat_size(dims)));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        t = next_line("layer");
        const std::size_t expect = static_cast<std::size_t>(dims[l + 1]) * static_cast<std::size_t>(dims[l] + 1);
        if (t.size() != expect + 2 || t[0] != "layer" || t[1] != std::to_string(l)) {
            throw fail("expected 'layer " + std::to_string(l) + "' with " + std::to_string(expect) + " values");
        }
        for (std::size_t i = 2; i < t.size(); ++i) flat[k++] = number(t[i]);
    }
    m.mlp = params_unflatten(dims, flat);
    return m;
}

inline DenoiserModel load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw LoadError("load_model: cannot open '" + path + "'");
    return read_model(is, path);
}

}  // namespace nldae
