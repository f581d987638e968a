#pragma once

// Result rows and their CSV encoding.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nldae/errors.hpp"
#include "nldae/model_io.hpp"

namespace nldae {

inline constexpr std::string_view kCsvHeader =
    "case,sweep,sweep_value,method,metric,mean,std_err,n_trials,seed,config_hash,failure";

/// One (grid point, method, metric) measurement. `seed` is empty for rows
/// aggregated across seeds (written as "all").
struct ResultRow {
    std::string experiment;
    std::string sweep;
    double sweep_value = 0.0;
    std::string method;
    std::string metric;
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t n_trials = 0;
    std::optional<std::uint64_t> seed;
    std::string config_hash;
    std::string failure;

    bool failed() const { return !failure.empty(); }

    friend bool operator==(const ResultRow& a, const ResultRow& b) {
        auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
        return a.experiment == b.experiment && a.sweep == b.sweep && same(a.sweep_value, b.sweep_value) &&
               a.method == b.method && a.metric == b.metric && same(a.mean, b.mean) && same(a.std_err, b.std_err) &&
               a.n_trials == b.n_trials && a.seed == b.seed && a.config_hash == b.config_hash &&
               a.failure == b.failure;
    }
};

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_double(v);
}

/// Split one CSV record; handles quoted fields (which may span lines).
inline bool read_csv_record(std::istream& is, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    std::string line;
    if (!std::getline(is, line)) return false;
    ++line_no;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0;; ++i) {
        if (i == line.size()) {
            if (!quoted) break;
            cur += '\n';
            if (!std::getline(is, line)) throw LoadError("csv: unterminated quoted field at line " + std::to_string(line_no));
            ++line_no;
            i = static_cast<std::size_t>(-1);
            continue;
        }
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return true;
}

inline double csv_parse_number(const std::string& s, std::size_t line_no) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    if (!parse_double(s, v)) throw LoadError("csv: line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << kCsvHeader << '\n';
    for (const ResultRow& r : rows) {
        os << detail::csv_field(r.experiment) << ',' << detail::csv_field(r.sweep) << ','
           << detail::csv_number(r.sweep_value) << ',' << detail::csv_field(r.method) << ','
           << detail::csv_field(r.metric) << ',' << detail::csv_number(r.mean) << ','
           << detail::csv_number(r.std_err) << ',' << r.n_trials << ','
           << (r.seed ? std::to_string(*r.seed) : std::string("all")) << ',' << detail::csv_field(r.config_hash)
           << ',' << detail::csv_field(r.failure) << '\n';
    }
}

inline void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw LoadError("write_csv: cannot open '" + path + "' for writing");
    write_csv(os, rows);
    os.flush();
    if (!os) throw LoadError("write_csv: write failed for '" + path + "'");
}

inline std::vector<ResultRow> read_csv(std::istream& is, const std::string& source = "<csv>") {
    std::vector<std::string> f;
    std::size_t line_no = 0;
    if (!detail::read_csv_record(is, f, line_no)) throw LoadError(source + ": empty file, expected CSV header");
    std::string header;
    for (std::size_t i = 0; i < f.size(); ++i) header += (i ? "," : "") + f[i];
    if (header != kCsvHeader) throw LoadError(source + ": unexpected CSV header '" + header + "'");

    std::vector<ResultRow> rows;
    while (detail::read_csv_record(is, f, line_no)) {
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 11) throw LoadError(source + ": line " + std::to_string(line_no) + ": expected 11 fields, got " + std::to_string(f.size()));
        ResultRow r;
        r.experiment = f[0];
        r.sweep = f[1];
        r.sweep_value = detail::csv_parse_number(f[2], line_no);
        r.method = f[3];
        r.metric = f[4];
        r.mean = detail::csv_parse_number(f[5], line_no);
        r.std_err = detail::csv_parse_number(f[6], line_no);
        std::size_t n = 0;
        if (std::from_chars(f[7].data(), f[7].data() + f[7].size(), n).ec != std::errc{}) {
            throw LoadError(source + ": line " + std::to_string(line_no) + ": bad n_trials '" + f[7] + "'");
        }
        r.n_trials = n;
        if (f[8] != "all") {
            std::uint64_t s = 0;
            if (std::from_chars(f[8].data(), f[8].data() + f[8].size(), s).ec != std::errc{}) {
                throw LoadError(source + ": line " + std::to_string(line_no) + ": bad seed '" + f[8] + "'");
            }
            r.seed = s;
        }
        r.config_hash = f[9];
        r.failure = f[10];
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<ResultRow> read_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw LoadError("read_csv: cannot open '" + path + "'");
    return read_csv(is, path);
}

}  // namespace nldae
