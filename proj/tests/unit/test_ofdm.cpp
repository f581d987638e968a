#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "nldae/sim_ofdm.hpp"

using namespace nldae;
using namespace nldae::ofdm;

namespace {

// Natural cubic spline from the full 4(m-1) coefficient system, solved densely.
// Outside the knot range the boundary piece is extended.
std::vector<double> dense_natural_spline(const std::vector<double>& xs, const std::vector<double>& ys,
                                         const std::vector<double>& at) {
    const int m = static_cast<int>(xs.size());
    const int segs = m - 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4 * segs, 4 * segs);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(4 * segs);
    int row = 0;
    // piece i: a + b t + c t^2 + d t^3 with t = x - xs[i]
    for (int i = 0; i < segs; ++i) {
        const double h = xs[i + 1] - xs[i];
        A(row, 4 * i) = 1.0;
        b[row++] = ys[i];
        A(row, 4 * i) = 1.0;
        A(row, 4 * i + 1) = h;
        A(row, 4 * i + 2) = h * h;
        A(row, 4 * i + 3) = h * h * h;
        b[row++] = ys[i + 1];
    }
    for (int i = 0; i + 1 < segs; ++i) {
        const double h = xs[i + 1] - xs[i];
        A(row, 4 * i + 1) = 1.0;
        A(row, 4 * i + 2) = 2.0 * h;
        A(row, 4 * i + 3) = 3.0 * h * h;
        A(row++, 4 * (i + 1) + 1) = -1.0;
        A(row, 4 * i + 2) = 2.0;
        A(row, 4 * i + 3) = 6.0 * h;
        A(row++, 4 * (i + 1) + 2) = -2.0;
    }
    A(row++, 2) = 2.0;
    const double hl = xs[m - 1] - xs[m - 2];
    A(row, 4 * (segs - 1) + 2) = 2.0;
    A(row++, 4 * (segs - 1) + 3) = 6.0 * hl;
    const Eigen::VectorXd c = A.fullPivLu().solve(b);
    std::vector<double> out;
    for (double x : at) {
        int i = 0;
        while (i + 1 < segs && x >= xs[i + 1]) ++i;
        const double t = x - xs[i];
        out.push_back(c[4 * i] + c[4 * i + 1] * t + c[4 * i + 2] * t * t + c[4 * i + 3] * t * t * t);
    }
    return out;
}

}  // namespace

TEST(Ofdm, ConstellationAndPilots) {
    const auto& c = qam4();
    ASSERT_EQ(c.size(), 4u);
    for (const auto& z : c) EXPECT_NEAR(std::abs(z), 1.0, 1e-15);
    EXPECT_EQ(c[0], pilot_symbol());
    const OfdmScenario sc;
    EXPECT_EQ(sc.pilot_indices(), (std::vector<int>{1, 4, 7, 10}));
}

TEST(Ofdm, SymbolsUnitPowerPilotsFixedUniformData) {
    const OfdmScenario sc;
    RngStream r = rng_new(1);
    std::vector<int> counts(4, 0);
    int draws = 0;
    const auto mask = sc.pilot_mask();
    while (draws < 12000) {
        const Symbols s = gen_symbols(sc, r);
        for (int n = 0; n < sc.P; ++n) {
            EXPECT_NEAR(std::abs(s.d[n]), 1.0, 1e-15);
            if (mask[static_cast<std::size_t>(n)]) {
                EXPECT_EQ(s.d[n], pilot_symbol());
            } else {
                ++counts[static_cast<std::size_t>(s.index[static_cast<std::size_t>(n)])];
                ++draws;
            }
        }
    }
    for (int k : counts) EXPECT_NEAR(static_cast<double>(k) / draws, 0.25, 0.01);
}

TEST(Ofdm, CfrClosedForms) {
    const CVec flat = cfr({{1.0, 0.0}}, {0.0}, 12, 15e3);
    for (int n = 0; n < 12; ++n) EXPECT_NEAR(std::abs(flat[n] - std::complex<double>(1.0, 0.0)), 0.0, 1e-15);
    const double tau = 1.0 / (12 * 15e3 * 7.0);
    const CVec h = cfr({{1.0, 0.0}}, {tau}, 12, 15e3);
    for (int n = 0; n < 12; ++n) {
        EXPECT_NEAR(std::abs(h[n]), 1.0, 1e-14);
        EXPECT_NEAR(std::arg(h[n]), std::remainder(-2.0 * std::numbers::pi * n * 15e3 * tau, 2.0 * std::numbers::pi), 1e-12);
    }
    EXPECT_THROW(cfr({{1.0, 0.0}}, {}, 12, 15e3), ParameterError);
}

TEST(Ofdm, CfrPowerAddsOverPaths) {
    const OfdmScenario sc;
    RngStream r = rng_new(2);
    double p = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) p += std::norm(gen_cfr(sc, r).h[5]);
    EXPECT_NEAR(p / n, 4.0, 0.15);
}

TEST(Ofdm, NoiseVariance) {
    OfdmScenario sc;
    sc.snr_db = 0.0;
    EXPECT_DOUBLE_EQ(snr_to_noise_variance(sc), 4.0);
    sc.snr_db = 10.0;
    sc.Lp = 1;
    EXPECT_NEAR(snr_to_noise_variance(sc), 0.1, 1e-15);
    sc.snr_db = 5.0;
    sc.Lp = 4;
    EXPECT_NEAR(snr_to_noise_variance(sc), 1.2649, 1e-4);
}

TEST(Ofdm, Transmit) {
    const OfdmScenario sc;
    RngStream r = rng_new(3);
    const Symbols s = gen_symbols(sc, r);
    ChannelRealization flat{{{1.0, 0.0}}, {0.0}, CVec::Ones(12)};
    EXPECT_EQ(transmit(s.d, flat, 0.0, r).y, s.d);
    const ChannelRealization ch = gen_cfr(sc, r);
    EXPECT_EQ(transmit(s.d, ch, 0.0, r).y, CVec(s.d.cwiseProduct(ch.h)));

    const double var = 1.2649;
    double sum = 0.0, sum2 = 0.0;
    const int frames = 1000;
    for (int i = 0; i < frames; ++i) {
        const Received rx = transmit(s.d, ch, var, r);
        for (int n = 0; n < 12; ++n) {
            const double e = std::norm(rx.y[n] - s.d[n] * ch.h[n]);
            sum += e;
            sum2 += e * e;
        }
    }
    const double cnt = frames * 12.0;
    const double se = std::sqrt((sum2 / cnt - (sum / cnt) * (sum / cnt)) / cnt);
    EXPECT_NEAR(sum / cnt, var, 3.0 * se);
}

TEST(Ofdm, SplineOnFlatChannelIsConstant) {
    const OfdmScenario sc;
    RngStream r = rng_new(4);
    const Symbols s = gen_symbols(sc, r);
    const CVec h = estimate_channel_cubic(s.d, s.d, sc);
    for (int n = 0; n < 12; ++n) EXPECT_NEAR(std::abs(h[n] - std::complex<double>(1.0, 0.0)), 0.0, 1e-14);
}

TEST(Ofdm, SplineMatchesDenseNaturalSplineOracle) {
    const OfdmScenario sc;
    RngStream r = rng_new(5);
    const std::vector<double> xs{1, 4, 7, 10};
    std::vector<double> at;
    for (int n = 0; n < 12; ++n) at.push_back(n);
    for (int t = 0; t < 20; ++t) {
        const Symbols s = gen_symbols(sc, r);
        const ChannelRealization ch = gen_cfr(sc, r);
        const Received rx = transmit(s.d, ch, 0.5, r);
        const CVec h = estimate_channel_cubic(rx.y, s.d, sc);
        std::vector<double> re, im;
        for (int p : sc.pilot_indices()) {
            const auto q = rx.y[p] / s.d[p];
            re.push_back(q.real());
            im.push_back(q.imag());
            EXPECT_EQ(h[p], q);
        }
        const auto ore = dense_natural_spline(xs, re, at), oim = dense_natural_spline(xs, im, at);
        for (int n = 0; n < 12; ++n) {
            EXPECT_NEAR(h[n].real(), ore[static_cast<std::size_t>(n)], 1e-10);
            EXPECT_NEAR(h[n].imag(), oim[static_cast<std::size_t>(n)], 1e-10);
        }
    }
}

TEST(Ofdm, SplineTracksSinglePathChannel) {
    OfdmScenario sc;
    RngStream r = rng_new(6);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double tau = sample_uniform(r, 0.0, 1e-6);
        const CVec h = cfr({{1.0, 0.0}}, {tau}, sc.P, sc.delta_f);
        const Symbols s = gen_symbols(sc, r);
        const CVec est = estimate_channel_cubic(s.d.cwiseProduct(h), s.d, sc);
        worst = std::max(worst, (est - h).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 0.05);
}

TEST(Ofdm, NearestSymbolAndTies) {
    EXPECT_EQ(nearest_symbol({0.9, 0.8}), 0);
    EXPECT_EQ(nearest_symbol({-0.9, 0.8}), 1);
    EXPECT_EQ(nearest_symbol({-0.9, -0.8}), 2);
    EXPECT_EQ(nearest_symbol({0.9, -0.8}), 3);
    EXPECT_EQ(nearest_symbol({0.0, 0.0}), 0);
    EXPECT_EQ(nearest_symbol({0.0, -1.0}), 2);
}

TEST(Ofdm, NoiselessFlatChannelDemodulatesPerfectly) {
    const OfdmScenario sc;
    RngStream r = rng_new(7);
    std::vector<std::vector<int>> sent, got;
    for (int t = 0; t < 50; ++t) {
        const Symbols s = gen_symbols(sc, r);
        sent.push_back(s.index);
        got.push_back(receive(s.d, sc));
    }
    EXPECT_EQ(ser(got, sent, sc), 0.0);
}

TEST(Ofdm, SerCountsDataSubcarriersOnly) {
    const OfdmScenario sc;
    std::vector<int> sent(12, 0), wrong(12, 2);
    EXPECT_EQ(ser({sent}, {sent}, sc), 0.0);
    EXPECT_EQ(ser({wrong}, {sent}, sc), 1.0);
    EXPECT_THROW(ser({sent, sent}, {sent}, sc), ParameterError);

    RngStream r = rng_new(8);
    std::vector<std::vector<int>> s, g;
    for (int t = 0; t < 1250; ++t) {
        std::vector<int> a(12), b(12);
        for (int n = 0; n < 12; ++n) {
            a[n] = static_cast<int>(r.next() >> 62);
            b[n] = static_cast<int>(r.next() >> 62);
        }
        s.push_back(a);
        g.push_back(b);
    }
    const double se = std::sqrt(0.75 * 0.25 / 10000.0);
    EXPECT_NEAR(ser(g, s, sc), 0.75, 3.0 * se);
}

TEST(Ofdm, ZeroChannelEstimateCountsFault) {
    const OfdmScenario sc;
    CVec x = CVec::Constant(12, {0.5, 0.5});
    CVec h = CVec::Ones(12);
    h[3] = 0.0;
    int faults = -1;
    const auto d = demodulate(x, h, sc, &faults);
    EXPECT_EQ(faults, 1);
    EXPECT_EQ(d[3], 0);
}
