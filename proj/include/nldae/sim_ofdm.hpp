#pragma once

// Symbol demodulation over a multipath OFDM channel.
//
// Frequency-domain model: y = d (.) h + n, with h[n] = sum_l alpha_l
// exp(-i 2 pi n df tau_l). The receiver estimates h by cubic interpolation
// of y/d over the pilot subcarriers and demaps y/h to the nearest 4-QAM point.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "nldae/errors.hpp"
#include "nldae/mlp.hpp"
#include "nldae/rng.hpp"

namespace nldae::ofdm {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;

enum class SplineKind { Natural, NotAKnot };

/// Unit-power 4-QAM points; index 0 doubles as the pilot symbol.
inline const std::vector<cplx>& qam4() {
    static const std::vector<cplx> points = [] {
        const double s = 1.0 / std::numbers::sqrt2;
        return std::vector<cplx>{{s, s}, {-s, s}, {-s, -s}, {s, -s}};
    }();
    return points;
}

struct OfdmScenario {
    int P = 12;
    double delta_f = 15e3;
    int Lp = 4;
    int K = 3;
    int pilot_offset = 1;  // pilots at n*K + pilot_offset (0-based subcarriers)
    double tau_max = 1e-6;
    double snr_db = 5.0;
    SplineKind spline = SplineKind::Natural;

    std::vector<int> pilot_indices() const {
        std::vector<int> idx;
        for (int n = pilot_offset; n < P; n += K) idx.push_back(n);
        return idx;
    }

    std::vector<bool> pilot_mask() const {
        std::vector<bool> mask(static_cast<std::size_t>(P), false);
        for (int n : pilot_indices()) mask[static_cast<std::size_t>(n)] = true;
        return mask;
    }

    void validate() const {
        if (P < 1 || Lp < 1 || K < 2) throw ParameterError("OfdmScenario: need P >= 1, Lp >= 1, K >= 2");
        if (pilot_offset < 0 || pilot_offset >= P) throw ParameterError("OfdmScenario: pilot offset outside [0, P)");
    }
};

inline cplx pilot_symbol() { return qam4()[0]; }

struct Symbols {
    CVec d;
    std::vector<int> index;  // constellation index per subcarrier
};

inline Symbols gen_symbols(const OfdmScenario& sc, RngStream& r) {
    sc.validate();
    const auto& c = qam4();
    Symbols s;
    s.d.resize(sc.P);
    s.index.resize(static_cast<std::size_t>(sc.P));
    for (int n = 0; n < sc.P; ++n) {
        const int k = static_cast<int>(r.next() >> 62);  // uniform over 4 points
        s.index[static_cast<std::size_t>(n)] = k;
        s.d[n] = c[static_cast<std::size_t>(k)];
    }
    for (int n : sc.pilot_indices()) {
        s.index[static_cast<std::size_t>(n)] = 0;
        s.d[n] = pilot_symbol();
    }
    return s;
}

struct ChannelRealization {
    std::vector<cplx> alpha;
    std::vector<double> tau;
    CVec h;
};

/// Channel frequency response on P subcarriers for the given paths.
inline CVec cfr(const std::vector<cplx>& alpha, const std::vector<double>& tau, int P, double delta_f) {
    if (alpha.size() != tau.size()) throw ParameterError("cfr: alpha and tau differ in length");
    CVec h = CVec::Zero(P);
    for (int n = 0; n < P; ++n) {
        for (std::size_t l = 0; l < alpha.size(); ++l) {
            h[n] += alpha[l] * std::polar(1.0, -2.0 * std::numbers::pi * n * delta_f * tau[l]);
        }
    }
    return h;
}

inline ChannelRealization gen_cfr(const OfdmScenario& sc, RngStream& r) {
    sc.validate();
    ChannelRealization ch;
    for (int l = 0; l < sc.Lp; ++l) {
        ch.alpha.push_back(sample_complex_normal(r, 1.0));
        ch.tau.push_back(sample_uniform(r, 0.0, sc.tau_max));
    }
    ch.h = cfr(ch.alpha, ch.tau, sc.P, sc.delta_f);
    return ch;
}

/// Noise variance for the scenario SNR, taking mean received power to be Lp
/// (unit-power symbols through Lp unit-power paths).
inline double snr_to_noise_variance(const OfdmScenario& sc) {
    return static_cast<double>(sc.Lp) / std::pow(10.0, sc.snr_db / 10.0);
}

struct Received {
    CVec y;
    CVec noise;
};

inline Received transmit(const CVec& d, const ChannelRealization& ch, double noise_var, RngStream& r) {
    if (d.size() != ch.h.size()) throw ParameterError("transmit: symbol and channel lengths differ");
    Received out;
    out.noise.resize(d.size());
    for (Eigen::Index n = 0; n < d.size(); ++n) out.noise[n] = sample_complex_normal(r, noise_var);
    out.y = d.cwiseProduct(ch.h) + out.noise;
    return out;
}

/// Interpolating cubic spline through (xs, ys), extrapolated beyond the end
/// knots with the boundary segment's cubic.
class CubicSpline {
public:
    CubicSpline(std::vector<double> xs, std::vector<double> ys, SplineKind kind = SplineKind::Natural)
        : xs_(std::move(xs)), ys_(std::move(ys)) {
        const std::size_t n = xs_.size();
        if (n < 2 || ys_.size() != n) throw ParameterError("CubicSpline: need at least 2 knots");
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!(xs_[i] < xs_[i + 1])) throw ParameterError("CubicSpline: knots must be strictly increasing");
        }
        m_.assign(n, 0.0);
        if (n == 2) return;
        if (kind == SplineKind::NotAKnot && n == 3) {
            // not-a-knot on three knots is the interpolating parabola
            const double h0 = xs_[1] - xs_[0], h1 = xs_[2] - xs_[1];
            const double s0 = (ys_[1] - ys_[0]) / h0, s1 = (ys_[2] - ys_[1]) / h1;
            m_.assign(n, 2.0 * (s1 - s0) / (h0 + h1));
            return;
        }

        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = xs_[i] - xs_[i - 1], h1 = xs_[i + 1] - xs_[i];
            const auto r = static_cast<Eigen::Index>(i);
            A(r, r - 1) = h0 / 6.0;
            A(r, r) = (h0 + h1) / 3.0;
            A(r, r + 1) = h1 / 6.0;
            rhs[r] = (ys_[i + 1] - ys_[i]) / h1 - (ys_[i] - ys_[i - 1]) / h0;
        }
        const auto last = static_cast<Eigen::Index>(n - 1);
        if (kind == SplineKind::Natural) {
            A(0, 0) = 1.0;
            A(last, last) = 1.0;
        } else {
            // continuous third derivative across the second and penultimate knots
            const double h0 = xs_[1] - xs_[0], h1 = xs_[2] - xs_[1];
            A(0, 0) = h1;
            A(0, 1) = -(h0 + h1);
            A(0, 2) = h0;
            const double g0 = xs_[n - 2] - xs_[n - 3], g1 = xs_[n - 1] - xs_[n - 2];
            A(last, last - 2) = g1;
            A(last, last - 1) = -(g0 + g1);
            A(last, last) = g0;
        }
        const Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
        for (std::size_t i = 0; i < n; ++i) m_[i] = sol[static_cast<Eigen::Index>(i)];
    }

    double operator()(double t) const {
        const std::size_t n = xs_.size();
        std::size_t i = 0;
        while (i + 2 < n && t > xs_[i + 1]) ++i;
        const double h = xs_[i + 1] - xs_[i];
        const double a = xs_[i + 1] - t;
        const double b = t - xs_[i];
        return m_[i] * a * a * a / (6.0 * h) + m_[i + 1] * b * b * b / (6.0 * h) +
               (ys_[i] / h - m_[i] * h / 6.0) * a + (ys_[i + 1] / h - m_[i + 1] * h / 6.0) * b;
    }

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<double> m_;  // second derivatives at the knots
};

/// Pilot-based channel estimate: h_hat[p] = x[p] / d[p] at the pilots, cubic
/// interpolation (real and imaginary parts separately) everywhere else.
inline CVec estimate_channel_cubic(const CVec& x, const CVec& d, const OfdmScenario& sc) {
    const std::vector<int> pilots = sc.pilot_indices();
    if (pilots.size() < 2) throw ParameterError("estimate_channel_cubic: need at least 2 pilot positions");
    if (x.size() != sc.P || d.size() != sc.P) throw ParameterError("estimate_channel_cubic: length must equal P");
    std::vector<double> xs, re, im;
    for (int p : pilots) {
        const cplx hp = x[p] / d[p];
        xs.push_back(p);
        re.push_back(hp.real());
        im.push_back(hp.imag());
    }
    const CubicSpline s_re(xs, re, sc.spline);
    const CubicSpline s_im(xs, im, sc.spline);
    CVec h(sc.P);
    for (int n = 0; n < sc.P; ++n) h[n] = {s_re(n), s_im(n)};
    // knots reproduce the pilot ratios exactly
    for (std::size_t k = 0; k < pilots.size(); ++k) h[pilots[k]] = {re[k], im[k]};
    return h;
}

/// Index of the nearest constellation point; ties go to the lowest index.
inline int nearest_symbol(cplx z) {
    const auto& c = qam4();
    int best = 0;
    double best_d = std::norm(z - c[0]);
    for (std::size_t k = 1; k < c.size(); ++k) {
        const double dist = std::norm(z - c[k]);
        if (dist < best_d) {
            best_d = dist;
            best = static_cast<int>(k);
        }
    }
    return best;
}

/// Zero-forcing equalisation and nearest-point demapping. Subcarriers with
/// |h_hat| < 1e-12 are demapped from x directly and counted in `faults`.
inline std::vector<int> demodulate(const CVec& x, const CVec& h_hat, const OfdmScenario& sc, int* faults = nullptr) {
    if (x.size() != h_hat.size() || x.size() != sc.P) throw ParameterError("demodulate: length must equal P");
    std::vector<int> out(static_cast<std::size_t>(sc.P));
    int bad = 0;
    for (int n = 0; n < sc.P; ++n) {
        if (std::abs(h_hat[n]) < 1e-12) {
            ++bad;
            out[static_cast<std::size_t>(n)] = nearest_symbol(x[n]);
        } else {
            out[static_cast<std::size_t>(n)] = nearest_symbol(x[n] / h_hat[n]);
        }
    }
    if (faults) *faults = bad;
    return out;
}

/// Symbol error rate over data (non-pilot) subcarriers of all frames.
inline double ser(const std::vector<std::vector<int>>& detected, const std::vector<std::vector<int>>& sent,
                  const OfdmScenario& sc) {
    if (detected.size() != sent.size()) throw ParameterError("ser: frame counts differ");
    const std::vector<bool> pilot = sc.pilot_mask();
    std::size_t errors = 0, total = 0;
    for (std::size_t j = 0; j < sent.size(); ++j) {
        if (detected[j].size() != sent[j].size() || sent[j].size() != pilot.size()) throw ParameterError("ser: frame length must equal P");
        for (std::size_t n = 0; n < pilot.size(); ++n) {
            if (pilot[n]) continue;
            ++total;
            if (detected[j][n] != sent[j][n]) ++errors;
        }
    }
    if (total == 0) throw ParameterError("ser: no data subcarriers");
    return static_cast<double>(errors) / static_cast<double>(total);
}

/// Per-frame simulation record.
struct Frame {
    Symbols symbols;
    ChannelRealization channel;
    CVec x;  // d (.) h
    CVec y;
    CVec noise;
};

inline std::vector<Frame> make_case2_frames(std::size_t count, const OfdmScenario& sc, RngStream& r) {
    if (count < 1) throw ParameterError("make_case2_frames: count must be >= 1");
    const double nv = snr_to_noise_variance(sc);
    std::vector<Frame> frames;
    frames.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Frame f;
        f.symbols = gen_symbols(sc, r);
        f.channel = gen_cfr(sc, r);
        Received rx = transmit(f.symbols.d, f.channel, nv, r);
        f.x = f.symbols.d.cwiseProduct(f.channel.h);
        f.y = std::move(rx.y);
        f.noise = std::move(rx.noise);
        frames.push_back(std::move(f));
    }
    return frames;
}

/// Received frame -> equalised symbol decisions using the known pilots.
inline std::vector<int> receive(const CVec& x_tilde, const OfdmScenario& sc) {
    CVec d_known = CVec::Zero(sc.P);
    for (int p : sc.pilot_indices()) d_known[p] = pilot_symbol();
    return demodulate(x_tilde, estimate_channel_cubic(x_tilde, d_known, sc), sc);
}

}  // namespace nldae::ofdm
