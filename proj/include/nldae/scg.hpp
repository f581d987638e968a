#pragma once

// Full-batch scaled conjugate gradient (Moller, 1993), in the formulation
// popularised by Netlab's scg.m: the Hessian-vector product along the search
// direction is approximated by a gradient difference, and a Levenberg-style
// scale `lambda` regularises the step. Only steps that do not increase the
// loss are accepted.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "nldae/errors.hpp"
#include "nldae/mlp.hpp"

namespace nldae {

struct TrainConfig {
    std::size_t max_iters = 500;
    double grad_tolerance = 1e-6;
    double sigma_scg = 1e-4;
    double lambda_init = 1e-6;

    void validate() const {
        if (max_iters < 1) throw ParameterError("TrainConfig: max_iters must be >= 1");
        if (!(grad_tolerance > 0.0) || !(sigma_scg > 0.0) || !(lambda_init > 0.0)) {
            throw ParameterError("TrainConfig: tolerances must be > 0");
        }
    }
};

struct TrainResult {
    MlpParams params;
    std::vector<double> loss_history;  // initial loss, then one entry per accepted step
    std::size_t iterations = 0;
    std::size_t accepted = 0;

    double initial_loss() const { return loss_history.front(); }
    double final_loss() const { return loss_history.back(); }
};

inline TrainResult scg_train(const MlpParams& p0, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    data.validate();

    constexpr double lambda_min = 1e-15;
    constexpr double lambda_max = 1e100;

    const std::vector<int>& dims = p0.dims;
    const auto n_params = static_cast<std::size_t>(flat_size(dims));

    auto eval = [&](const Vec& w, Vec& g) { return loss_and_gradient(params_unflatten(dims, w), data, g); };
    auto eval_loss = [&](const Vec& w) { return mean_loss(params_unflatten(dims, w), data); };

    TrainResult out;
    Vec w = params_flatten(p0);
    Vec grad_new;
    double f_old = eval(w, grad_new);
    if (!std::isfinite(f_old)) throw TrainingError("scg_train: non-finite initial loss", 0);
    out.loss_history.push_back(f_old);

    Vec grad_old = grad_new;
    Vec d = -grad_new;
    Vec g_plus;
    bool success = true;
    std::size_t n_success = 0;
    double lambda = cfg.lambda_init;
    double mu = 0.0, kappa = 0.0, theta = 0.0;

    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
        out.iterations = it;
        if (grad_new.norm() < cfg.grad_tolerance) break;

        if (success) {
            mu = d.dot(grad_new);
            if (mu >= 0.0) {
                d = -grad_new;
                mu = d.dot(grad_new);
            }
            kappa = d.squaredNorm();
            if (kappa < 1e-300) break;
            const double sigma = cfg.sigma_scg / std::sqrt(kappa);
            eval(w + sigma * d, g_plus);
            theta = d.dot(g_plus - grad_new) / sigma;
        }

        double delta = theta + lambda * kappa;
        if (delta <= 0.0) {
            delta = lambda * kappa;
            lambda -= theta / kappa;
        }
        const double alpha = -mu / delta;
        const Vec w_new = w + alpha * d;
        const double f_new = eval_loss(w_new);
        if (!std::isfinite(f_new)) throw TrainingError("scg_train: non-finite loss", it);
        const double comparison = 2.0 * (f_new - f_old) / (alpha * mu);

        if (comparison >= 0.0 && f_new <= f_old) {
            success = true;
            ++n_success;
            ++out.accepted;
            w = w_new;
            f_old = f_new;
            out.loss_history.push_back(f_new);
            grad_old = grad_new;
            eval(w, grad_new);
        } else {
            success = false;
        }

        if (comparison < 0.25) lambda = std::min(4.0 * lambda, lambda_max);
        if (comparison > 0.75) lambda = std::max(0.5 * lambda, lambda_min);

        if (n_success == n_params) {
            d = -grad_new;
            n_success = 0;
        } else if (success) {
            const double gamma = (grad_old - grad_new).dot(grad_new) / mu;
            d = gamma * d - grad_new;
        }
    }

    out.params = params_unflatten(dims, w);
    return out;
}

}  // namespace nldae
