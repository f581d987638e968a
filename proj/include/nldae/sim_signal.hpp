#pragma once

// Signal restoration: superposed damped sinusoids corrupted by a constant
// offset C on samples selected by i.i.d. Bernoulli draws.

#include <cmath>
#include <numbers>
#include <vector>

#include "nldae/errors.hpp"
#include "nldae/mlp.hpp"
#include "nldae/rng.hpp"

namespace nldae::signal {

struct SinusoidParams {
    std::vector<double> V;      // peak amplitudes
    std::vector<double> gamma;  // damping factors [1/s]
    std::vector<double> f;      // frequencies [Hz]
    double dt = 0.5e-4;         // sampling interval [s]
    int P = 12;

    void validate() const {
        if (V.size() != gamma.size() || V.size() != f.size()) throw ParameterError("SinusoidParams: V, gamma, f must have equal length k");
        if (P < 1 || !(dt > 0.0)) throw ParameterError("SinusoidParams: need P >= 1 and dt > 0");
        const double nyquist = 1.0 / (2.0 * dt);
        for (std::size_t l = 0; l < f.size(); ++l) {
            if (!(gamma[l] >= 0.0)) throw ParameterError("SinusoidParams: damping factor must be >= 0");
            if (!(f[l] < nyquist)) throw ParameterError("SinusoidParams: frequency violates Nyquist (f >= 1/(2 dt))");
        }
    }
};

/// Distribution of the per-sample sinusoid parameters.
struct SinusoidSampler {
    int k = 3;
    double gamma_max = 1e3;
    double f_max = 1e4;
    double dt = 0.5e-4;
    int P = 12;

    SinusoidParams draw(RngStream& r) const {
        SinusoidParams sp;
        sp.dt = dt;
        sp.P = P;
        for (int l = 0; l < k; ++l) {
            sp.V.push_back(sample_normal(r, 0.0, 1.0));
            sp.gamma.push_back(sample_uniform(r, 0.0, gamma_max));
            sp.f.push_back(sample_uniform(r, 0.0, f_max));
        }
        return sp;
    }
};

struct CorruptionSpec {
    double p_cor = 0.9;
    double C = 1.0;
};

inline Vec gen_signal(const SinusoidParams& sp) {
    sp.validate();
    Vec x = Vec::Zero(sp.P);
    for (int n = 0; n < sp.P; ++n) {
        const double t = n * sp.dt;
        for (std::size_t l = 0; l < sp.V.size(); ++l) {
            x[n] += sp.V[l] * std::exp(-sp.gamma[l] * t) * std::cos(2.0 * std::numbers::pi * sp.f[l] * t);
        }
    }
    return x;
}

struct Corrupted {
    Vec y;
    Vec noise;              // C * mask
    std::vector<int> mask;
};

inline Corrupted corrupt(const Vec& x, const CorruptionSpec& spec, RngStream& r) {
    Corrupted c;
    c.mask.resize(static_cast<std::size_t>(x.size()));
    c.noise = Vec::Zero(x.size());
    for (Eigen::Index n = 0; n < x.size(); ++n) {
        c.mask[static_cast<std::size_t>(n)] = sample_bernoulli(r, spec.p_cor);
        c.noise[n] = spec.C * c.mask[static_cast<std::size_t>(n)];
    }
    c.y = x + c.noise;
    return c;
}

/// Aligned training/test triples with noisy = clean + noise.
struct Triples {
    std::vector<Vec> noisy;
    std::vector<Vec> clean;
    std::vector<Vec> noise;

    std::size_t size() const noexcept { return noisy.size(); }
};

inline Triples make_case1_dataset(std::size_t count, const SinusoidSampler& sampler, const CorruptionSpec& spec,
                                  RngStream& r) {
    if (count < 1) throw ParameterError("make_case1_dataset: count must be >= 1");
    Triples t;
    t.noisy.reserve(count);
    t.clean.reserve(count);
    t.noise.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Vec x = gen_signal(sampler.draw(r));
        Corrupted c = corrupt(x, spec, r);
        t.noisy.push_back(std::move(c.y));
        t.clean.push_back(std::move(x));
        t.noise.push_back(std::move(c.noise));
    }
    return t;
}

}  // namespace nldae::signal
