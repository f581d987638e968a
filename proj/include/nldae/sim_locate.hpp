#pragma once

// ToA-based 2-D localization: ranging noise N = N_N + N_U + R_nlos * N_B,
// distance quantization, and classical MDS positioning anchored to known
// reference nodes.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nldae/errors.hpp"
#include "nldae/mlp.hpp"
#include "nldae/rng.hpp"

namespace nldae::locate {

using Point = Eigen::Vector2d;

struct LocScene {
    std::vector<Point> refs;
    Point target = Point::Zero();
};

struct RangeNoiseParams {
    double sigma_n = 10.0;  // std of N_N
    double u_max = 20.0;    // N_U ~ U(0, u_max)
    double p_nlos = 0.2;
    double r_nlos = 50.0;
    double B = 10.0;        // quantization resolution
};

enum class QuantizerKind { Nearest, Floor };

inline LocScene gen_scene(int P, double side, RngStream& r) {
    if (P < 3) throw ParameterError("gen_scene: need at least 3 reference nodes");
    LocScene s;
    for (int p = 0; p < P; ++p) {
        const double x = sample_uniform(r, 0.0, side);
        const double y = sample_uniform(r, 0.0, side);
        s.refs.emplace_back(x, y);
    }
    const double tx = sample_uniform(r, 0.0, side);
    const double ty = sample_uniform(r, 0.0, side);
    s.target = Point(tx, ty);
    return s;
}

inline Vec true_distances(const LocScene& s) {
    Vec x(static_cast<Eigen::Index>(s.refs.size()));
    for (std::size_t p = 0; p < s.refs.size(); ++p) x[static_cast<Eigen::Index>(p)] = (s.refs[p] - s.target).norm();
    return x;
}

inline Vec sample_range_noise(const RangeNoiseParams& np, int P, RngStream& r) {
    Vec n(P);
    for (int p = 0; p < P; ++p) {
        const double nn = sample_normal(r, 0.0, np.sigma_n);
        const double nu = sample_uniform(r, 0.0, np.u_max);
        const int nb = sample_bernoulli(r, np.p_nlos);
        n[p] = nn + nu + np.r_nlos * nb;
    }
    return n;
}

/// Q_B: nearest multiple of B with ties rounded up (or floor to a multiple).
inline double quantize(double v, double B, QuantizerKind kind = QuantizerKind::Nearest) {
    if (!(B > 0.0)) throw ParameterError("quantize: resolution B must be > 0");
    const double q = kind == QuantizerKind::Nearest ? std::floor(v / B + 0.5) : std::floor(v / B);
    return q * B + 0.0;  // + 0.0 turns -0 into +0
}

inline Vec quantize(const Vec& v, double B, QuantizerKind kind = QuantizerKind::Nearest) {
    if (!(B > 0.0)) throw ParameterError("quantize: resolution B must be > 0");
    return v.unaryExpr([&](double x) { return quantize(x, B, kind); });
}

struct EigenPairs {
    Vec values;    // descending
    Mat vectors;   // column k pairs with values[k]
};

/// Cyclic Jacobi rotations for a symmetric matrix, swept until the
/// off-diagonal mass is at machine precision. Eigenvalues sorted descending.
inline EigenPairs jacobi_eigen(const Mat& sym, int max_sweeps = 100) {
    const Eigen::Index n = sym.rows();
    if (sym.cols() != n) throw ParameterError("jacobi_eigen: matrix must be square");
    Mat a = 0.5 * (sym + sym.transpose());
    Mat v = Mat::Identity(n, n);

    const double scale = std::max(a.norm(), 1e-300);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * scale) break;

        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
    EigenPairs out{Vec(n), Mat(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

/// Rigid transform (orthogonal R, translation t) minimising
/// sum |R * src_i + t - dst_i|^2. Reflections are allowed; no scaling.
struct RigidTransform {
    Eigen::Matrix2d R = Eigen::Matrix2d::Identity();
    Point t = Point::Zero();

    Point operator()(const Point& p) const { return R * p + t; }
};

inline RigidTransform procrustes(const std::vector<Point>& src, const std::vector<Point>& dst) {
    if (src.size() != dst.size() || src.empty()) throw ParameterError("procrustes: point sets must be non-empty and equal in size");
    Point cs = Point::Zero(), cd = Point::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        cs += src[i];
        cd += dst[i];
    }
    cs /= static_cast<double>(src.size());
    cd /= static_cast<double>(dst.size());
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) H += (dst[i] - cd) * (src[i] - cs).transpose();
    const Eigen::JacobiSVD<Eigen::Matrix2d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RigidTransform T;
    T.R = svd.matrixU() * svd.matrixV().transpose();
    T.t = cd - T.R * cs;
    return T;
}

/// Relative threshold below which the second MDS eigenvalue counts as zero.
inline constexpr double kMdsRankTolerance = 1e-10;

/// Classical MDS on the joint (refs + target) squared-distance matrix,
/// aligned to the known reference positions. Negative target distances are
/// clamped to 0.
inline Point mds_locate(const std::vector<Point>& refs, const Vec& target_dists) {
    const auto P = static_cast<Eigen::Index>(refs.size());
    if (P < 3) throw ParameterError("mds_locate: need at least 3 reference nodes");
    if (target_dists.size() != P) throw ParameterError("mds_locate: one distance per reference required");
    const Eigen::Index n = P + 1;

    Mat D2 = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < P; ++i) {
        for (Eigen::Index j = i + 1; j < P; ++j) {
            D2(i, j) = D2(j, i) = (refs[static_cast<std::size_t>(i)] - refs[static_cast<std::size_t>(j)]).squaredNorm();
        }
        const double d = std::max(target_dists[i], 0.0);
        D2(i, P) = D2(P, i) = d * d;
    }
    const Mat J = Mat::Identity(n, n) - Mat::Constant(n, n, 1.0 / static_cast<double>(n));
    const Mat G = -0.5 * J * D2 * J;

    const EigenPairs eig = jacobi_eigen(G);
    const double l1 = eig.values[0], l2 = eig.values[1];
    if (!(l1 > 0.0) || !(l2 > kMdsRankTolerance * l1)) {
        throw RankDeficiencyError("mds_locate: leading two eigenvalues are not both positive (rank-deficient geometry)");
    }
    std::vector<Point> emb(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        emb[static_cast<std::size_t>(i)] = Point(eig.vectors(i, 0) * std::sqrt(l1), eig.vectors(i, 1) * std::sqrt(l2));
    }
    const std::vector<Point> emb_refs(emb.begin(), emb.begin() + P);
    const RigidTransform T = procrustes(emb_refs, refs);
    return T(emb.back());
}

inline double loc_error(const Point& est, const Point& truth) { return (est - truth).norm(); }

/// One localization sample: scene, true distances x, raw noise n, and the
/// network-facing quantised quantities Q(x + n) and Q(n).
struct LocSample {
    LocScene scene;
    Vec clean;
    Vec noise;
    Vec noisy_q;
    Vec noise_q;
};

struct LocDataset {
    std::vector<LocSample> samples;

    std::vector<Vec> inputs() const {
        std::vector<Vec> v;
        for (const auto& s : samples) v.push_back(s.noisy_q);
        return v;
    }
    std::vector<Vec> clean() const {
        std::vector<Vec> v;
        for (const auto& s : samples) v.push_back(s.clean);
        return v;
    }
    std::vector<Vec> noise_q() const {
        std::vector<Vec> v;
        for (const auto& s : samples) v.push_back(s.noise_q);
        return v;
    }
};

inline LocDataset make_case3_dataset(std::size_t count, int P, double side, const RangeNoiseParams& np, RngStream& r,
                                     QuantizerKind kind = QuantizerKind::Nearest) {
    if (count < 1) throw ParameterError("make_case3_dataset: count must be >= 1");
    LocDataset ds;
    ds.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        LocSample s;
        s.scene = gen_scene(P, side, r);
        s.clean = true_distances(s.scene);
        s.noise = sample_range_noise(np, P, r);
        s.noisy_q = quantize(Vec(s.clean + s.noise), np.B, kind);
        s.noise_q = quantize(s.noise, np.B, kind);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace nldae::locate
