#pragma once

// Quick invariant checks runnable from the command line (`nldae selftest`).

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "nldae/bench.hpp"
#include "nldae/denoiser.hpp"
#include "nldae/mlp.hpp"
#include "nldae/model_io.hpp"
#include "nldae/results.hpp"
#include "nldae/rng.hpp"
#include "nldae/sim_locate.hpp"
#include "nldae/sim_ofdm.hpp"

namespace nldae {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline double max_fd_relative_error(const MlpParams& p, const Dataset& data, double step) {
    const Vec g = gradient(p, data);
    Vec w = params_flatten(p);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double orig = w[i];
        w[i] = orig + step;
        const double fp = mean_loss(params_unflatten(p.dims, w), data);
        w[i] = orig - step;
        const double fm = mean_loss(params_unflatten(p.dims, w), data);
        w[i] = orig;
        const double fd = (fp - fm) / (2.0 * step);
        const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-7});
        worst = std::max(worst, std::abs(fd - g[i]) / denom);
    }
    return worst;
}

}  // namespace detail

inline std::vector<CheckResult> run_selftest(std::uint64_t seed = 2024) {
    std::vector<CheckResult> out;
    RngStream root = rng_new(seed);
    auto check = [&](std::string name, bool ok, std::string detail = {}) {
        out.push_back({std::move(name), ok, std::move(detail)});
    };

    {
        RngStream a = rng_new(seed), b = rng_new(seed);
        bool same = true;
        for (int i = 0; i < 100; ++i) same &= a.next() == b.next();
        const RngStream c0 = split(a, 0), c0b = split(a, 0), c1 = split(a, 1);
        same &= c0 == c0b && !(c0 == c1);
        check("rng determinism and split purity", same);
    }

    {
        RngStream r = root.split(1);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<int> dims;
            const int layers = 2 + static_cast<int>(r.next() % 4);
            for (int l = 0; l <= layers; ++l) dims.push_back(1 + static_cast<int>(r.next() % 6));
            const MlpParams p = mlp_init(dims, r);
            Mat in(dims.front(), 5), tg(dims.back(), 5);
            for (Eigen::Index i = 0; i < in.size(); ++i) in.data()[i] = sample_uniform(r, -1.0, 1.0);
            for (Eigen::Index i = 0; i < tg.size(); ++i) tg.data()[i] = sample_uniform(r, 0.05, 0.95);
            worst = std::max(worst, detail::max_fd_relative_error(p, Dataset(in, tg), 1e-5));
        }
        check("backprop gradient vs central differences", worst < 1e-5, "max rel err " + format_double(worst));
    }

    {
        RngStream r = root.split(2);
        std::vector<Vec> s;
        for (int i = 0; i < 50; ++i) {
            Vec v(4);
            for (int k = 0; k < 4; ++k) v[k] = sample_normal(r, 3.0, 10.0);
            s.push_back(v);
        }
        const AffineScaler sc = fit_scaler(s);
        double worst = 0.0;
        for (const Vec& v : s) worst = std::max(worst, ((sc.invert(sc.apply(v)) - v).cwiseAbs().array() / v.cwiseAbs().array().max(1e-300)).maxCoeff());
        check("scaler round trip", worst < 1e-12, "max rel err " + format_double(worst));
    }

    {
        RngStream r = root.split(3);
        DenoiserModel m;
        m.mode = Mode::nlDAE;
        m.mlp = mlp_init(autoencoder_dims(12, 9, 1), r);
        m.scaler_in = {-3.0, 4.0, 0.05, 0.95};
        m.scaler_out = {-2.0, 2.0, 0.05, 0.95};
        bool ok = true;
        for (int j = 0; j < 100; ++j) {
            Vec y(12);
            for (int k = 0; k < 12; ++k) y[k] = sample_uniform(r, -3.0, 4.0);
            const Vec out_v = denoise(m, y);
            const Vec g = regenerate(m, y);
            for (int k = 0; k < 12; ++k) ok &= out_v[k] == y[k] - g[k];
        }
        std::stringstream ss;
        write_model(ss, m);
        const DenoiserModel back = read_model(ss);
        ok &= back.mlp == m.mlp && back.scaler_in == m.scaler_in && back.scaler_out == m.scaler_out;
        check("nlDAE subtraction identity and model round trip", ok);
    }

    {
        RngStream r = root.split(4);
        ofdm::OfdmScenario sc;
        bool ok = true;
        for (int t = 0; t < 20; ++t) {
            const auto ch = ofdm::gen_cfr(sc, r);
            ok &= (ofdm::cfr(ch.alpha, ch.tau, sc.P, sc.delta_f) - ch.h).cwiseAbs().maxCoeff() <= 1e-12;
            const auto s = ofdm::gen_symbols(sc, r);
            const CVec x = s.d.cwiseProduct(ch.h);
            const CVec h_hat = ofdm::estimate_channel_cubic(x, s.d, sc);
            for (int p : sc.pilot_indices()) ok &= std::abs(h_hat[p] - x[p] / s.d[p]) == 0.0;
        }
        check("CFR exactness and spline knot fidelity", ok);
    }

    {
        RngStream r = root.split(5);
        double worst = 0.0;
        for (int t = 0; t < 5; ++t) {
            Mat a(13, 13);
            for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = sample_normal(r, 0.0, 1.0);
            a = (a + a.transpose()).eval();
            const auto e = locate::jacobi_eigen(a);
            for (Eigen::Index k = 0; k < 13; ++k) {
                worst = std::max(worst, (a * e.vectors.col(k) - e.values[k] * e.vectors.col(k)).norm());
            }
        }
        check("Jacobi eigenpair residual", worst < 1e-8, "max residual " + format_double(worst));
    }

    {
        RngStream r = root.split(6);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const auto s = locate::gen_scene(12, 100.0, r);
            worst = std::max(worst, locate::loc_error(locate::mds_locate(s.refs, locate::true_distances(s)), s.target));
        }
        check("MDS exact on noiseless distances", worst < 1e-6, "max error " + format_double(worst));
    }

    {
        std::vector<ResultRow> rows(2);
        rows[0] = {"toy1", "noise_param", 0.25, "nlDAE", "mse", 0.1234567890123, 0.001, 5, 3, "abc", ""};
        rows[1] = {"toy1", "noise_param", 0.0, "nlDAE", "mse", std::nan(""), std::nan(""), 0, std::nullopt, "abc", "degenerate, \"constant\""};
        std::stringstream ss;
        write_csv(ss, rows);
        check("CSV round trip", read_csv(ss) == rows);
    }
    return out;
}

}  // namespace nldae
