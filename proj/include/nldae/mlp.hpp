#pragma once

// Dense feedforward network with a sigmoid after every layer, squared-error
// loss and exact backpropagation.
//
// Layer l maps dims[l] -> dims[l+1] through weights[l] (dims[l+1] x dims[l])
// and biases[l]. Batched routines take one sample per column.
//
// Flat parameter order: layer-major; within a layer the weight matrix in
// row-major order, followed by the bias vector.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nldae/errors.hpp"
#include "nldae/rng.hpp"

namespace nldae {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Pre-activations are clamped to +-kSigmoidClamp before the logistic, which
/// keeps every output inside [S(-35), S(35)] ~ [6.3e-16, 1 - 6.3e-16], so a
/// forward pass never returns exactly 0 or 1 in double precision.
inline constexpr double kSigmoidClamp = 35.0;

inline double sigmoid(double a) noexcept {
    const double z = a > kSigmoidClamp ? kSigmoidClamp : (a < -kSigmoidClamp ? -kSigmoidClamp : a);
    return 1.0 / (1.0 + std::exp(-z));
}

struct MlpParams {
    std::vector<int> dims;
    std::vector<Mat> weights;
    std::vector<Vec> biases;

    std::size_t num_layers() const noexcept { return weights.size(); }
    int input_dim() const noexcept { return dims.front(); }
    int output_dim() const noexcept { return dims.back(); }

    friend bool operator==(const MlpParams& a, const MlpParams& b) {
        if (a.dims != b.dims) return false;
        for (std::size_t l = 0; l < a.weights.size(); ++l) {
            if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
        }
        return true;
    }
};

/// Autoencoder widths: [P, P', ..., P', P] with `depth` hidden layers.
inline std::vector<int> autoencoder_dims(int P, int P_prime, int depth) {
    if (P < 1 || P_prime < 1 || depth < 1) throw ParameterError("autoencoder_dims: widths and depth must be >= 1");
    if (P_prime >= P) throw ParameterError("autoencoder_dims: latent width must be smaller than P");
    std::vector<int> dims{P};
    for (int i = 0; i < depth; ++i) dims.push_back(P_prime);
    dims.push_back(P);
    return dims;
}

inline void validate_dims(const std::vector<int>& dims) {
    if (dims.size() < 2) throw ParameterError("mlp dims need at least an input and an output width");
    for (int w : dims) {
        if (w < 1) throw ParameterError("mlp dims: width < 1");
    }
}

inline std::size_t flat_size(const std::vector<int>& dims) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        n += static_cast<std::size_t>(dims[l + 1]) * static_cast<std::size_t>(dims[l] + 1);
    }
    return n;
}

/// Weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
inline MlpParams mlp_init(const std::vector<int>& dims, RngStream& r) {
    validate_dims(dims);
    MlpParams p;
    p.dims = dims;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
        Mat w(dims[l + 1], dims[l]);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                double v = sample_uniform(r, -bound, bound);
                // keep the open interval: the lower endpoint is reachable
                while (v == -bound) v = sample_uniform(r, -bound, bound);
                w(i, j) = v;
            }
        }
        p.weights.push_back(std::move(w));
        p.biases.push_back(Vec::Zero(dims[l + 1]));
    }
    return p;
}

inline Vec params_flatten(const MlpParams& p) {
    Vec flat(static_cast<Eigen::Index>(flat_size(p.dims)));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        const Mat& w = p.weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) flat[k++] = w(i, j);
        }
        for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) flat[k++] = p.biases[l][i];
    }
    return flat;
}

inline MlpParams params_unflatten(const std::vector<int>& dims, const Vec& flat) {
    validate_dims(dims);
    if (static_cast<std::size_t>(flat.size()) != flat_size(dims)) {
        throw ParameterError("params_unflatten: expected " + std::to_string(flat_size(dims)) +
                             " values, got " + std::to_string(flat.size()));
    }
    MlpParams p;
    p.dims = dims;
    Eigen::Index k = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Mat w(dims[l + 1], dims[l]);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = flat[k++];
        }
        Vec b(dims[l + 1]);
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = flat[k++];
        p.weights.push_back(std::move(w));
        p.biases.push_back(std::move(b));
    }
    return p;
}

/// Batched forward pass; returns the activations of every layer, input first.
inline std::vector<Mat> forward_layers(const MlpParams& p, const Mat& inputs) {
    if (inputs.rows() != p.input_dim()) throw ParameterError("forward: input dimension mismatch");
    std::vector<Mat> acts;
    acts.reserve(p.num_layers() + 1);
    acts.push_back(inputs);
    for (std::size_t l = 0; l < p.num_layers(); ++l) {
        Mat z = p.weights[l] * acts.back();
        z.colwise() += p.biases[l];
        acts.push_back(z.unaryExpr([](double a) { return sigmoid(a); }));
    }
    return acts;
}

inline Mat forward_batch(const MlpParams& p, const Mat& inputs) {
    return std::move(forward_layers(p, inputs).back());
}

inline Vec forward(const MlpParams& p, const Vec& x) {
    if (x.size() != p.input_dim()) throw ParameterError("forward: input dimension mismatch");
    Vec a = x;
    for (std::size_t l = 0; l < p.num_layers(); ++l) {
        Vec z = p.weights[l] * a + p.biases[l];
        a = z.unaryExpr([](double v) { return sigmoid(v); });
    }
    return a;
}

inline double loss_sq(const Vec& pred, const Vec& target) {
    if (pred.size() != target.size()) throw ParameterError("loss_sq: length mismatch");
    return (pred - target).squaredNorm();
}

/// Training set, one sample per column.
struct Dataset {
    Mat inputs;
    Mat targets;

    Dataset() = default;
    Dataset(Mat in, Mat out) : inputs(std::move(in)), targets(std::move(out)) { validate(); }

    static Dataset from_vectors(const std::vector<Vec>& in, const std::vector<Vec>& out) {
        if (in.empty() || in.size() != out.size()) throw ParameterError("Dataset: need M >= 1 aligned samples");
        const Eigen::Index P_in = in.front().size();
        const Eigen::Index P_out = out.front().size();
        Mat a(P_in, static_cast<Eigen::Index>(in.size()));
        Mat b(P_out, static_cast<Eigen::Index>(out.size()));
        for (std::size_t i = 0; i < in.size(); ++i) {
            if (in[i].size() != P_in || out[i].size() != P_out) throw ParameterError("Dataset: ragged vectors");
            a.col(static_cast<Eigen::Index>(i)) = in[i];
            b.col(static_cast<Eigen::Index>(i)) = out[i];
        }
        return Dataset(std::move(a), std::move(b));
    }

    Eigen::Index size() const noexcept { return inputs.cols(); }

    void validate() const {
        if (inputs.cols() < 1 || inputs.cols() != targets.cols()) throw ParameterError("Dataset: need M >= 1 aligned samples");
        if (!inputs.allFinite() || !targets.allFinite()) throw ParameterError("Dataset: non-finite entries");
    }
};

/// Mean over samples of loss_sq.
inline double mean_loss(const MlpParams& p, const Dataset& data) {
    const Mat out = forward_batch(p, data.inputs);
    if (out.rows() != data.targets.rows()) throw ParameterError("mean_loss: target dimension mismatch");
    return (out - data.targets).squaredNorm() / static_cast<double>(data.size());
}

/// Loss and gradient of the mean squared-error objective, flattened in the
/// canonical order.
inline double loss_and_gradient(const MlpParams& p, const Dataset& data, Vec& grad) {
    if (data.targets.rows() != p.output_dim()) throw ParameterError("gradient: target dimension mismatch");
    const std::vector<Mat> acts = forward_layers(p, data.inputs);
    const double inv_m = 1.0 / static_cast<double>(data.size());
    const Mat diff = acts.back() - data.targets;
    const double loss = diff.squaredNorm() * inv_m;

    grad.resize(static_cast<Eigen::Index>(flat_size(p.dims)));
    // offsets of each layer's block in the flat vector
    std::vector<Eigen::Index> offset(p.num_layers() + 1, 0);
    for (std::size_t l = 0; l < p.num_layers(); ++l) {
        offset[l + 1] = offset[l] + p.weights[l].size() + p.biases[l].size();
    }

    Mat delta = (2.0 * inv_m) * diff.cwiseProduct(acts.back().cwiseProduct((1.0 - acts.back().array()).matrix()));
    for (std::size_t l = p.num_layers(); l-- > 0;) {
        const Mat gw = delta * acts[l].transpose();
        const Vec gb = delta.rowwise().sum();
        Eigen::Index k = offset[l];
        for (Eigen::Index i = 0; i < gw.rows(); ++i) {
            for (Eigen::Index j = 0; j < gw.cols(); ++j) grad[k++] = gw(i, j);
        }
        for (Eigen::Index i = 0; i < gb.size(); ++i) grad[k++] = gb[i];
        if (l > 0) {
            const Mat& a = acts[l];
            delta = (p.weights[l].transpose() * delta).cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
        }
    }
    return loss;
}

inline Vec gradient(const MlpParams& p, const Dataset& data) {
    Vec g;
    loss_and_gradient(p, data, g);
    return g;
}

}  // namespace nldae
