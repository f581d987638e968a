#pragma once

// Experiment configuration: a flat `key = value` text format with `#`
// comments. Every resolved configuration has a stable 64-bit hash that is
// stamped on each result row.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "nldae/errors.hpp"
#include "nldae/model_io.hpp"
#include "nldae/scg.hpp"
#include "nldae/sim_locate.hpp"
#include "nldae/sim_ofdm.hpp"

namespace nldae {

enum class Case { Toy1, Toy2, Signal, Ofdm, Locate };
enum class Sweep { Latent, TrainSize, NoiseParam, Depth };

inline std::string_view to_string(Case c) {
    switch (c) {
        case Case::Toy1: return "toy1";
        case Case::Toy2: return "toy2";
        case Case::Signal: return "signal";
        case Case::Ofdm: return "ofdm";
        case Case::Locate: return "locate";
    }
    return "?";
}

inline std::string_view to_string(Sweep s) {
    switch (s) {
        case Sweep::Latent: return "latent";
        case Sweep::TrainSize: return "train_size";
        case Sweep::NoiseParam: return "noise_param";
        case Sweep::Depth: return "depth";
    }
    return "?";
}

inline bool is_toy(Case c) { return c == Case::Toy1 || c == Case::Toy2; }

struct ExperimentConfig {
    Case experiment = Case::Toy1;
    Sweep sweep = Sweep::NoiseParam;
    std::vector<double> grid;
    std::size_t M = 2000;  // desk scale; --paper-scale selects 10000
    std::size_t L = 1000;  // desk scale; --paper-scale selects 5000
    int P = 12;
    int P_prime = 9;
    int depth = 1;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::string out_path;
    unsigned workers = 0;  // 0 = hardware concurrency; not part of the hash

    TrainConfig train;

    // toy examples
    double toy_sigma = 0.5;

    // signal restoration
    int sig_k = 3;
    double sig_p_cor = 0.9;
    double sig_C = 1.0;
    double sig_dt = 0.5e-4;
    double sig_gamma_max = 1e3;
    double sig_f_max = 1e4;

    // OFDM
    double ofdm_snr_db = 5.0;
    int ofdm_Lp = 4;
    int ofdm_K = 3;
    double ofdm_delta_f = 15e3;
    int ofdm_pilot_offset = 1;
    double ofdm_tau_max = 1e-6;
    ofdm::SplineKind ofdm_spline = ofdm::SplineKind::Natural;

    // localization
    double loc_p_nlos = 0.2;
    double loc_sigma_n = 10.0;
    bool loc_sigma_n_is_variance = false;
    double loc_u_max = 20.0;
    double loc_r_nlos = 50.0;
    double loc_B = 10.0;
    double loc_side = 100.0;
    locate::QuantizerKind loc_quantizer = locate::QuantizerKind::Nearest;

    void use_paper_scale() {
        M = 10000;
        L = 5000;
    }

    /// Copy with the swept parameter set to `value`.
    ExperimentConfig at(double value) const {
        ExperimentConfig c = *this;
        switch (sweep) {
            case Sweep::Latent: c.P_prime = static_cast<int>(value); break;
            case Sweep::TrainSize: c.M = static_cast<std::size_t>(value); break;
            case Sweep::Depth: c.depth = static_cast<int>(value); break;
            case Sweep::NoiseParam:
                switch (experiment) {
                    case Case::Toy1:
                    case Case::Toy2: c.toy_sigma = value; break;
                    case Case::Signal: c.sig_p_cor = value; break;
                    case Case::Ofdm: c.ofdm_snr_db = value; break;
                    case Case::Locate: c.loc_p_nlos = value; break;
                }
                break;
        }
        return c;
    }

    ofdm::OfdmScenario ofdm_scenario() const {
        ofdm::OfdmScenario sc;
        sc.P = P;
        sc.delta_f = ofdm_delta_f;
        sc.Lp = ofdm_Lp;
        sc.K = ofdm_K;
        sc.pilot_offset = ofdm_pilot_offset;
        sc.tau_max = ofdm_tau_max;
        sc.snr_db = ofdm_snr_db;
        sc.spline = ofdm_spline;
        return sc;
    }

    locate::RangeNoiseParams range_noise() const {
        locate::RangeNoiseParams np;
        np.sigma_n = loc_sigma_n_is_variance ? std::sqrt(loc_sigma_n) : loc_sigma_n;
        np.u_max = loc_u_max;
        np.p_nlos = loc_p_nlos;
        np.r_nlos = loc_r_nlos;
        np.B = loc_B;
        return np;
    }

    void validate() const {
        if (grid.empty()) throw ConfigError("config: grid must not be empty");
        if (seeds.empty()) throw ConfigError("config: at least one seed required");
        for (double v : grid) {
            const ExperimentConfig c = at(v);
            if (c.M < 1 || c.L < 1) throw ConfigError("config: M and L must be >= 1");
            if (c.P < 1 || c.P_prime < 1 || c.P_prime >= c.P) throw ConfigError("config: need 1 <= P_prime < P");
            if (c.depth < 1) throw ConfigError("config: depth must be >= 1");
            if (c.experiment == Case::Signal && !(c.sig_p_cor >= 0.0 && c.sig_p_cor <= 1.0)) throw ConfigError("config: p_cor outside [0,1]");
            if (c.experiment == Case::Locate && !(c.loc_p_nlos >= 0.0 && c.loc_p_nlos <= 1.0)) throw ConfigError("config: p_nlos outside [0,1]");
            if (c.experiment == Case::Locate && (c.P < 3 || !(c.loc_B > 0.0))) throw ConfigError("config: locate needs P >= 3 and B > 0");
            if (is_toy(c.experiment) && !(c.toy_sigma >= 0.0)) throw ConfigError("config: toy sigma must be >= 0");
        }
        if (sweep == Sweep::Latent || sweep == Sweep::Depth || sweep == Sweep::TrainSize) {
            for (double v : grid) {
                if (v != std::floor(v)) throw ConfigError("config: grid values for this sweep must be integers");
            }
        }
        try {
            train.validate();
            if (experiment == Case::Ofdm) ofdm_scenario().validate();
        } catch (const ParameterError& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }

    /// Canonical `key = value` listing of every setting that affects results.
    std::string canonical() const {
        std::ostringstream os;
        auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
        auto num = [&](double v) { return format_double(v); };
        auto list = [&](const auto& xs) {
            std::string s;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (i) s += ',';
                if constexpr (std::is_floating_point_v<std::decay_t<decltype(xs[i])>>) s += format_double(xs[i]);
                else s += std::to_string(xs[i]);
            }
            return s;
        };
        kv("case", std::string(to_string(experiment)));
        kv("sweep", std::string(to_string(sweep)));
        kv("grid", list(grid));
        kv("M", std::to_string(M));
        kv("L", std::to_string(L));
        kv("P", std::to_string(P));
        kv("P_prime", std::to_string(P_prime));
        kv("depth", std::to_string(depth));
        kv("seeds", list(seeds));
        kv("max_iters", std::to_string(train.max_iters));
        kv("grad_tolerance", num(train.grad_tolerance));
        kv("sigma_scg", num(train.sigma_scg));
        kv("lambda_init", num(train.lambda_init));
        if (is_toy(experiment)) kv("sigma", num(toy_sigma));
        if (experiment == Case::Signal) {
            kv("k", std::to_string(sig_k));
            kv("p_cor", num(sig_p_cor));
            kv("C", num(sig_C));
            kv("dt", num(sig_dt));
            kv("gamma_max", num(sig_gamma_max));
            kv("f_max", num(sig_f_max));
        }
        if (experiment == Case::Ofdm) {
            kv("snr_db", num(ofdm_snr_db));
            kv("Lp", std::to_string(ofdm_Lp));
            kv("K", std::to_string(ofdm_K));
            kv("delta_f", num(ofdm_delta_f));
            kv("pilot_offset", std::to_string(ofdm_pilot_offset));
            kv("tau_max", num(ofdm_tau_max));
            kv("spline", ofdm_spline == ofdm::SplineKind::Natural ? "natural" : "not_a_knot");
        }
        if (experiment == Case::Locate) {
            kv("p_nlos", num(loc_p_nlos));
            kv("range_sigma", num(loc_sigma_n));
            kv("range_sigma_is_variance", loc_sigma_n_is_variance ? "true" : "false");
            kv("u_max", num(loc_u_max));
            kv("r_nlos", num(loc_r_nlos));
            kv("B", num(loc_B));
            kv("side", num(loc_side));
            kv("quantizer", loc_quantizer == locate::QuantizerKind::Nearest ? "nearest" : "floor");
        }
        return os.str();
    }

    /// FNV-1a 64 of canonical(), as 16 hex digits.
    std::string hash() const {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (unsigned char ch : canonical()) {
            h ^= ch;
            h *= 0x100000001B3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::string item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

inline double parse_number(const std::string& key, const std::string& v) {
    double d = 0.0;
    if (!parse_double(v, d) || !std::isfinite(d)) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return d;
}

inline long long parse_integer(const std::string& key, const std::string& v) {
    const double d = parse_number(key, v);
    if (d != std::floor(d)) throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    return static_cast<long long>(d);
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
    const long long n = parse_integer(key, v);
    if (n < 0) throw ConfigError("config: '" + key + "' must be non-negative");
    return static_cast<std::size_t>(n);
}

inline std::vector<double> parse_number_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : detail::split_list(v)) out.push_back(parse_number(key, item));
    return out;
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& v) {
    std::vector<std::uint64_t> out;
    for (const auto& item : detail::split_list(v)) {
        std::uint64_t s = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), s);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) throw ConfigError("config: bad seed '" + item + "' in '" + key + "'");
        out.push_back(s);
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

/// Apply one `key = value` setting.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& v) {
    if (key == "case") {
        if (v == "toy1") c.experiment = Case::Toy1;
        else if (v == "toy2") c.experiment = Case::Toy2;
        else if (v == "signal") c.experiment = Case::Signal;
        else if (v == "ofdm") c.experiment = Case::Ofdm;
        else if (v == "locate") c.experiment = Case::Locate;
        else throw ConfigError("config: unknown case '" + v + "'");
    } else if (key == "sweep") {
        if (v == "latent") c.sweep = Sweep::Latent;
        else if (v == "train_size") c.sweep = Sweep::TrainSize;
        else if (v == "noise_param") c.sweep = Sweep::NoiseParam;
        else if (v == "depth") c.sweep = Sweep::Depth;
        else throw ConfigError("config: unknown sweep '" + v + "'");
    } else if (key == "grid") c.grid = parse_number_list(key, v);
    else if (key == "M") c.M = parse_count(key, v);
    else if (key == "L") c.L = parse_count(key, v);
    else if (key == "P") c.P = static_cast<int>(parse_integer(key, v));
    else if (key == "P_prime") c.P_prime = static_cast<int>(parse_integer(key, v));
    else if (key == "depth") c.depth = static_cast<int>(parse_integer(key, v));
    else if (key == "seeds") c.seeds = parse_seed_list(key, v);
    else if (key == "out_path") c.out_path = v;
    else if (key == "workers") c.workers = static_cast<unsigned>(parse_count(key, v));
    else if (key == "max_iters") c.train.max_iters = parse_count(key, v);
    else if (key == "grad_tolerance") c.train.grad_tolerance = parse_number(key, v);
    else if (key == "sigma_scg") c.train.sigma_scg = parse_number(key, v);
    else if (key == "lambda_init") c.train.lambda_init = parse_number(key, v);
    else if (key == "sigma") c.toy_sigma = parse_number(key, v);
    else if (key == "k") c.sig_k = static_cast<int>(parse_integer(key, v));
    else if (key == "p_cor") c.sig_p_cor = parse_number(key, v);
    else if (key == "C") c.sig_C = parse_number(key, v);
    else if (key == "dt") c.sig_dt = parse_number(key, v);
    else if (key == "gamma_max") c.sig_gamma_max = parse_number(key, v);
    else if (key == "f_max") c.sig_f_max = parse_number(key, v);
    else if (key == "snr_db") c.ofdm_snr_db = parse_number(key, v);
    else if (key == "Lp") c.ofdm_Lp = static_cast<int>(parse_integer(key, v));
    else if (key == "K") c.ofdm_K = static_cast<int>(parse_integer(key, v));
    else if (key == "delta_f") c.ofdm_delta_f = parse_number(key, v);
    else if (key == "pilot_offset") c.ofdm_pilot_offset = static_cast<int>(parse_integer(key, v));
    else if (key == "tau_max") c.ofdm_tau_max = parse_number(key, v);
    else if (key == "spline") {
        if (v == "natural") c.ofdm_spline = ofdm::SplineKind::Natural;
        else if (v == "not_a_knot") c.ofdm_spline = ofdm::SplineKind::NotAKnot;
        else throw ConfigError("config: unknown spline '" + v + "'");
    } else if (key == "p_nlos") c.loc_p_nlos = parse_number(key, v);
    else if (key == "range_sigma") c.loc_sigma_n = parse_number(key, v);
    else if (key == "range_sigma_is_variance") c.loc_sigma_n_is_variance = parse_bool(key, v);
    else if (key == "u_max") c.loc_u_max = parse_number(key, v);
    else if (key == "r_nlos") c.loc_r_nlos = parse_number(key, v);
    else if (key == "B") c.loc_B = parse_number(key, v);
    else if (key == "side") c.loc_side = parse_number(key, v);
    else if (key == "quantizer") {
        if (v == "nearest") c.loc_quantizer = locate::QuantizerKind::Nearest;
        else if (v == "floor") c.loc_quantizer = locate::QuantizerKind::Floor;
        else throw ConfigError("config: unknown quantizer '" + v + "'");
    } else throw ConfigError("config: unknown key '" + key + "'");
}

inline ExperimentConfig parse_config(std::istream& is, const std::string& source = "<config>") {
    ExperimentConfig c;
    bool have_case = false, have_sweep = false, have_grid = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(t).substr(0, eq));
        const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
        try {
            set_config_value(c, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
        have_case |= key == "case";
        have_sweep |= key == "sweep";
        have_grid |= key == "grid";
    }
    if (!have_case || !have_sweep || !have_grid) throw ConfigError(source + ": 'case', 'sweep' and 'grid' are required");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config '" + path + "'");
    return parse_config(is, path);
}

}  // namespace nldae
