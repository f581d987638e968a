#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nldae/sim_locate.hpp"

using namespace nldae;
using namespace nldae::locate;

namespace {

// Range-residual least squares: coarse grid, then Gauss-Newton.
Point trilaterate(const std::vector<Point>& refs, const Vec& d) {
    Point best(0.0, 0.0);
    double best_cost = INFINITY;
    for (double x = -50.0; x <= 150.0; x += 1.0) {
        for (double y = -50.0; y <= 150.0; y += 1.0) {
            double c = 0.0;
            for (std::size_t i = 0; i < refs.size(); ++i) {
                const double e = (Point(x, y) - refs[i]).norm() - d[static_cast<Eigen::Index>(i)];
                c += e * e;
            }
            if (c < best_cost) {
                best_cost = c;
                best = Point(x, y);
            }
        }
    }
    Point p = best;
    for (int it = 0; it < 100; ++it) {
        Eigen::MatrixXd J(refs.size(), 2);
        Eigen::VectorXd res(refs.size());
        for (std::size_t i = 0; i < refs.size(); ++i) {
            const Point v = p - refs[i];
            res[static_cast<Eigen::Index>(i)] = v.norm() - d[static_cast<Eigen::Index>(i)];
            J.row(static_cast<Eigen::Index>(i)) = v.transpose() / v.norm();
        }
        const Eigen::Vector2d step = J.colPivHouseholderQr().solve(-res);
        p += step;
        if (step.norm() < 1e-13) break;
    }
    return p;
}

}  // namespace

TEST(Scene, RangeMeanAndDeterminism) {
    RngStream r = rng_new(1), r2 = rng_new(1);
    const LocScene a = gen_scene(12, 100.0, r), b = gen_scene(12, 100.0, r2);
    EXPECT_EQ(a.refs, b.refs);
    EXPECT_EQ(a.target, b.target);
    double sum = 0.0;
    int count = 0;
    for (int t = 0; t < 10000; ++t) {
        const LocScene s = gen_scene(12, 100.0, r);
        for (const Point& p : s.refs) {
            ASSERT_GE(p.minCoeff(), 0.0);
            ASSERT_LE(p.maxCoeff(), 100.0);
        }
        sum += s.target.x() + s.target.y();
        count += 2;
    }
    EXPECT_NEAR(sum / count, 50.0, 0.5);
    EXPECT_THROW(gen_scene(2, 100.0, r), ParameterError);
}

TEST(Scene, Distances) {
    LocScene s;
    s.refs = {Point(0, 0), Point(10, 10), Point(3, 4)};
    s.target = Point(3, 4);
    const Vec d = true_distances(s);
    EXPECT_DOUBLE_EQ(d[0], 5.0);
    EXPECT_EQ(d[2], 0.0);
    LocScene swapped = s;
    std::swap(swapped.target, swapped.refs[1]);
    EXPECT_DOUBLE_EQ(true_distances(swapped)[1], d[1]);
}

TEST(RangeNoise, OffIsZero) {
    RngStream r = rng_new(2);
    EXPECT_EQ(sample_range_noise({0.0, 0.0, 0.0, 50.0, 10.0}, 12, r), Vec::Zero(12));
}

TEST(RangeNoise, Moments) {
    RngStream r = rng_new(3);
    const RangeNoiseParams np;
    double s = 0.0, s2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n / 10; ++i) {
        const Vec v = sample_range_noise(np, 10, r);
        s += v.sum();
        s2 += v.squaredNorm();
    }
    const double mean = s / n;
    EXPECT_NEAR(mean, 20.0, 0.3);
    EXPECT_NEAR(s2 / n - mean * mean, 100.0 + 400.0 / 12.0 + 2500.0 * 0.16, 15.0);
}

TEST(Quantize, Examples) {
    EXPECT_EQ(quantize(23.0, 10.0), 20.0);
    EXPECT_EQ(quantize(25.0, 10.0), 30.0);
    EXPECT_EQ(quantize(-4.0, 10.0), 0.0);
    EXPECT_FALSE(std::signbit(quantize(-4.0, 10.0)));
    EXPECT_EQ(quantize(-5.0, 10.0), 0.0);
    EXPECT_EQ(quantize(-6.0, 10.0), -10.0);
    EXPECT_EQ(quantize(29.9, 10.0, QuantizerKind::Floor), 20.0);
    EXPECT_THROW(quantize(1.0, 0.0), ParameterError);
}

TEST(Quantize, DatasetValuesAreMultiplesAndNonAdditive) {
    RngStream r = rng_new(4);
    const LocDataset ds = make_case3_dataset(100, 12, 100.0, {}, r);
    int non_additive = 0;
    for (const auto& s : ds.samples) {
        for (Eigen::Index i = 0; i < 12; ++i) {
            ASSERT_EQ(std::fmod(s.noisy_q[i], 10.0), 0.0);
            ASSERT_EQ(std::fmod(s.noise_q[i], 10.0), 0.0);
        }
        if ((s.noisy_q - s.noise_q - s.clean).cwiseAbs().maxCoeff() > 0.0) ++non_additive;
    }
    EXPECT_GE(non_additive, 1);
}

TEST(Jacobi, MatchesEigenOracle) {
    RngStream r = rng_new(5);
    for (int t = 0; t < 10; ++t) {
        const int n = 2 + t;
        Mat a(n, n);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = sample_normal(r, 0.0, 1.0);
        a = (a + a.transpose()).eval();
        const EigenPairs e = jacobi_eigen(a);
        const Eigen::SelfAdjointEigenSolver<Mat> oracle(a);
        const Vec ref = oracle.eigenvalues().reverse();
        for (int k = 0; k < n; ++k) {
            EXPECT_NEAR(e.values[k], ref[k], 1e-10);
            if (k) EXPECT_GE(e.values[k - 1], e.values[k]);
            EXPECT_LT((a * e.vectors.col(k) - e.values[k] * e.vectors.col(k)).norm(), 1e-9);
        }
        EXPECT_LT((e.vectors.transpose() * e.vectors - Mat::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_THROW(jacobi_eigen(Mat::Zero(2, 3)), ParameterError);
}

TEST(Procrustes, RecoversRigidMotion) {
    RngStream r = rng_new(6);
    const double th = 0.7;
    Eigen::Matrix2d R;
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Eigen::Matrix2d F = R * Eigen::Vector2d(1.0, -1.0).asDiagonal();  // with reflection
    const Point t(3.0, -8.0);
    for (const Eigen::Matrix2d& M : {R, F}) {
        std::vector<Point> src, dst;
        for (int i = 0; i < 6; ++i) {
            src.emplace_back(sample_uniform(r, 0.0, 10.0), sample_uniform(r, 0.0, 10.0));
            dst.push_back(M * src.back() + t);
        }
        const RigidTransform T = procrustes(src, dst);
        EXPECT_LT((T.R - M).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((T.t - t).cwiseAbs().maxCoeff(), 1e-11);
    }
    EXPECT_THROW(procrustes({}, {}), ParameterError);
}

TEST(Mds, ExactOnNoiselessScenes) {
    RngStream r = rng_new(7);
    for (int t = 0; t < 100; ++t) {
        const LocScene s = gen_scene(12, 100.0, r);
        EXPECT_LT(loc_error(mds_locate(s.refs, true_distances(s)), s.target), 1e-6);
    }
}

TEST(Mds, SquareSceneMatchesTrilateration) {
    LocScene s;
    s.refs = {Point(0, 0), Point(100, 0), Point(100, 100), Point(0, 100)};
    s.target = Point(30, 60);
    Vec d = true_distances(s);
    const Point oracle = trilaterate(s.refs, d);
    EXPECT_LT((mds_locate(s.refs, d) - oracle).norm(), 1e-4);
    EXPECT_LT((oracle - s.target).norm(), 1e-8);
    // inconsistent distances: both estimators still agree to first order
    d[0] += 1e-5;
    d[2] -= 2e-5;
    EXPECT_LT((mds_locate(s.refs, d) - trilaterate(s.refs, d)).norm(), 1e-4);
}

TEST(Mds, CollinearSceneIsRankDeficient) {
    LocScene s;
    s.refs = {Point(0, 0), Point(10, 10), Point(20, 20), Point(35, 35)};
    s.target = Point(50, 50);
    EXPECT_THROW(mds_locate(s.refs, true_distances(s)), RankDeficiencyError);
    EXPECT_THROW(mds_locate(s.refs, Vec::Ones(3)), ParameterError);
}

TEST(LocError, Examples) {
    EXPECT_EQ(loc_error(Point(1, 2), Point(1, 2)), 0.0);
    EXPECT_EQ(loc_error(Point(0, 0), Point(3, 4)), 5.0);
    const Point shift(17.0, -3.0);
    EXPECT_DOUBLE_EQ(loc_error(Point(0, 0) + shift, Point(3, 4) + shift), 5.0);
}
