#pragma once

// DAE and noise-learning DAE (nlDAE).
//
// Both share one network, one scaler pipeline and one trainer; they differ
// only in the regression target:
//   DAE   learns x from y, and denoises as       g(f(y))
//   nlDAE learns n from y, and denoises as   y - g(f(y))
//
// The decoder ends in a sigmoid, so inputs and targets are mapped affinely
// into [0.05, 0.95] using ranges fit on the training set.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "nldae/errors.hpp"
#include "nldae/mlp.hpp"
#include "nldae/rng.hpp"
#include "nldae/scg.hpp"

namespace nldae {

using CVec = Eigen::VectorXcd;

enum class Mode { DAE, nlDAE };

inline std::string_view to_string(Mode m) { return m == Mode::DAE ? "DAE" : "nlDAE"; }

inline Mode parse_mode(std::string_view s) {
    if (s == "DAE") return Mode::DAE;
    if (s == "nlDAE") return Mode::nlDAE;
    throw ParameterError("unknown denoiser mode '" + std::string(s) + "'");
}

/// Affine map of the source range [lo, hi] onto [a, b]. No clamping.
struct AffineScaler {
    double lo = 0.0;
    double hi = 1.0;
    double a = 0.05;
    double b = 0.95;

    double apply(double v) const { return a + (v - lo) * ((b - a) / (hi - lo)); }
    double invert(double u) const { return lo + (u - a) * ((hi - lo) / (b - a)); }

    Vec apply(const Vec& v) const { return v.unaryExpr([this](double x) { return apply(x); }); }
    Vec invert(const Vec& u) const { return u.unaryExpr([this](double x) { return invert(x); }); }

    friend bool operator==(const AffineScaler&, const AffineScaler&) = default;
};

inline AffineScaler fit_scaler(const std::vector<Vec>& samples, double a = 0.05, double b = 0.95) {
    if (samples.empty()) throw ParameterError("fit_scaler: no samples");
    if (!(a < b)) throw ParameterError("fit_scaler: target interval must satisfy a < b");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Vec& v : samples) {
        if (v.size() == 0) continue;
        lo = std::min(lo, v.minCoeff());
        hi = std::max(hi, v.maxCoeff());
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw ParameterError("fit_scaler: non-finite or empty samples");
    if (!(hi > lo)) throw DegenerateDataError("fit_scaler: constant data (min == max), cannot scale");
    return {lo, hi, a, b};
}

struct DenoiserModel {
    Mode mode = Mode::nlDAE;
    MlpParams mlp;
    AffineScaler scaler_in;
    AffineScaler scaler_out;

    // Accepted-step loss trace from training; empty for loaded models.
    std::vector<double> loss_history;

    int P() const { return mlp.input_dim(); }
    int P_prime() const { return mlp.dims.size() > 2 ? mlp.dims[1] : mlp.dims.back(); }
    int depth() const { return static_cast<int>(mlp.dims.size()) - 2; }
};

/// Train a denoiser directly on (input, target) pairs. `target` is the clean
/// signal for DAE and the noise for nlDAE; this entry point performs no
/// additivity check, which suits quantised inputs where Q(y) != x + Q(n).
inline DenoiserModel fit_denoiser(Mode mode, const std::vector<Vec>& inputs, const std::vector<Vec>& targets,
                                  int P_prime, int depth, const TrainConfig& cfg, RngStream r) {
    if (inputs.empty() || inputs.size() != targets.size()) throw ParameterError("fit_denoiser: need M >= 1 aligned samples");
    const int P = static_cast<int>(inputs.front().size());

    DenoiserModel m;
    m.mode = mode;
    m.scaler_in = fit_scaler(inputs);
    m.scaler_out = fit_scaler(targets);

    std::vector<Vec> in_scaled, out_scaled;
    in_scaled.reserve(inputs.size());
    out_scaled.reserve(targets.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i].size() != P || targets[i].size() != P) throw ParameterError("fit_denoiser: all vectors must have length P");
        in_scaled.push_back(m.scaler_in.apply(inputs[i]));
        out_scaled.push_back(m.scaler_out.apply(targets[i]));
    }
    const Dataset data = Dataset::from_vectors(in_scaled, out_scaled);

    const MlpParams p0 = mlp_init(autoencoder_dims(P, P_prime, depth), r);
    TrainResult tr = scg_train(p0, data, cfg);
    m.mlp = std::move(tr.params);
    m.loss_history = std::move(tr.loss_history);
    return m;
}

/// Additive-model training entry: requires noisy[i] = clean[i] + noise[i].
inline DenoiserModel train_denoiser(Mode mode, const std::vector<Vec>& noisy, const std::vector<Vec>& clean,
                                    const std::vector<Vec>& noise, int P_prime, int depth, const TrainConfig& cfg,
                                    RngStream r) {
    if (noisy.empty() || noisy.size() != clean.size() || noisy.size() != noise.size()) {
        throw ParameterError("train_denoiser: need M >= 1 aligned (noisy, clean, noise) triples");
    }
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        if (noisy[i].size() != clean[i].size() || noisy[i].size() != noise[i].size()) {
            throw ParameterError("train_denoiser: vector length mismatch at sample " + std::to_string(i));
        }
        const double dev = (noisy[i] - clean[i] - noise[i]).cwiseAbs().maxCoeff();
        if (!(dev <= 1e-9)) {
            throw ConsistencyError("train_denoiser: sample " + std::to_string(i) + " violates noisy = clean + noise");
        }
    }
    return fit_denoiser(mode, noisy, mode == Mode::DAE ? clean : noise, P_prime, depth, cfg, std::move(r));
}

/// Raw network output mapped back to data units: the regenerated clean
/// signal (DAE) or the regenerated noise (nlDAE).
inline Vec regenerate(const DenoiserModel& m, const Vec& y) {
    if (y.size() != m.P()) throw ParameterError("denoise: input length must equal P");
    return m.scaler_out.invert(forward(m.mlp, m.scaler_in.apply(y)));
}

inline Vec denoise(const DenoiserModel& m, const Vec& y) {
    Vec g = regenerate(m, y);
    if (m.mode == Mode::DAE) return g;
    return y - g;
}

/// Batched denoise over a collection. Results can differ from denoise() in
/// the last bits because matrix-matrix products sum in a different order.
inline std::vector<Vec> denoise_all(const DenoiserModel& m, const std::vector<Vec>& ys) {
    std::vector<Vec> out;
    out.reserve(ys.size());
    if (ys.empty()) return out;
    Mat in(m.P(), static_cast<Eigen::Index>(ys.size()));
    for (std::size_t j = 0; j < ys.size(); ++j) {
        if (ys[j].size() != m.P()) throw ParameterError("denoise: input length must equal P");
        in.col(static_cast<Eigen::Index>(j)) = m.scaler_in.apply(ys[j]);
    }
    const Mat raw = forward_batch(m.mlp, in);
    for (std::size_t j = 0; j < ys.size(); ++j) {
        Vec g = m.scaler_out.invert(Vec(raw.col(static_cast<Eigen::Index>(j))));
        out.push_back(m.mode == Mode::DAE ? g : Vec(ys[j] - g));
    }
    return out;
}

/// Real and imaginary parts are denoised by separate models and never mix.
inline CVec denoise_complex(const DenoiserModel& m_re, const DenoiserModel& m_im, const CVec& y) {
    if (m_re.mode != m_im.mode) throw ParameterError("denoise_complex: real/imaginary models differ in mode");
    if (m_re.P() != m_im.P()) throw ParameterError("denoise_complex: real/imaginary models differ in P");
    const Vec re = denoise(m_re, y.real());
    const Vec im = denoise(m_im, y.imag());
    CVec out(y.size());
    for (Eigen::Index k = 0; k < y.size(); ++k) out[k] = {re[k], im[k]};
    return out;
}

/// Per-element mean squared error: sum of squared differences / (L * P).
inline double mse(const std::vector<Vec>& est, const std::vector<Vec>& truth) {
    if (est.size() != truth.size() || est.empty()) throw ParameterError("mse: collections must be non-empty and equal in size");
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < est.size(); ++j) {
        if (est[j].size() != truth[j].size()) throw ParameterError("mse: vector length mismatch at " + std::to_string(j));
        acc += (est[j] - truth[j]).squaredNorm();
        count += static_cast<std::size_t>(est[j].size());
    }
    if (count == 0) throw ParameterError("mse: empty vectors");
    return acc / static_cast<double>(count);
}

}  // namespace nldae
