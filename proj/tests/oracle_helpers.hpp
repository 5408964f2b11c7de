/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_TESTS_ORACLE_HELPERS_HPP
#define CELLTRACK_TESTS_ORACLE_HELPERS_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "celltrack/capacity.hpp"
#include "celltrack/emf.hpp"
#include "celltrack/jekf.hpp"

namespace celltrack::oracle {

/*
 * Closed-form minimizer of the exponentially weighted least squares
 *   sum_j lambda^(n-j) (q_j - C d_j)^2
 * including the prior term (lambda^n / p_init)(C - c_init)^2, which makes
 * it match the recursive estimator exactly after every update.
 */
inline double batch_ls(const std::vector<Window> &windows, double lambda,
                       double c_init, double p_init)
{
    if (windows.empty()) {
        throw std::invalid_argument("batch_ls needs at least one window");
    }
    std::size_t n = windows.size();
    double wprior = std::pow(lambda, static_cast<double>(n)) / p_init;
    double num = wprior * c_init;
    double den = wprior;
    for (std::size_t j = 0; j < n; ++j) {
        double w = std::pow(lambda, static_cast<double>(n - 1 - j));
        double d = windows[j].s_b - windows[j].s_a;
        num += w * d * windows[j].charge_sum;
        den += w * d * d;
    }
    if (den <= 0.0) {
        throw std::runtime_error("singular system: zero information");
    }
    return num / den;
}

/* Propagation map the filter linearizes: written out independently of the
 * filter code so the finite-difference check is a real oracle. */
inline Eigen::VectorXd propagate_map(const Eigen::VectorXd &x, double u,
                                     double capacity, const JekfConfig &cfg)
{
    Eigen::VectorXd out = x;
    double th1 = x.size() == 5 ? x(4) : cfg.theta1_fixed;
    out(0) = x(0) + cfg.tau / capacity * u;
    out(1) = th1 * x(1) + x(2) * u;
    return out;
}

/* Output map at the predicted state, as the filter's H linearizes it. */
inline double output_map(const Eigen::VectorXd &x, double u,
                         const EmfCurve &curve)
{
    return curve.eval(x(0)) + x(1) + x(3) * u;
}

inline Eigen::MatrixXd fd_state_jacobian(const Eigen::VectorXd &x, double u,
                                         double capacity,
                                         const JekfConfig &cfg, double eps)
{
    long n = x.size();
    Eigen::MatrixXd J(n, n);
    for (long j = 0; j < n; ++j) {
        Eigen::VectorXd xp = x;
        Eigen::VectorXd xm = x;
        xp(j) += eps;
        xm(j) -= eps;
        J.col(j) = (propagate_map(xp, u, capacity, cfg) -
                    propagate_map(xm, u, capacity, cfg)) /
                   (2.0 * eps);
    }
    return J;
}

/* Differentiates the output map at the predicted state, where the filter
 * evaluates H. */
inline Eigen::RowVectorXd fd_output_jacobian(const Eigen::VectorXd &x_pred,
                                             double u, const EmfCurve &curve,
                                             double eps)
{
    long n = x_pred.size();
    Eigen::RowVectorXd J(n);
    for (long j = 0; j < n; ++j) {
        Eigen::VectorXd xp = x_pred;
        Eigen::VectorXd xm = x_pred;
        xp(j) += eps;
        xm(j) -= eps;
        J(j) = (output_map(xp, u, curve) - output_map(xm, u, curve)) /
               (2.0 * eps);
    }
    return J;
}

} // namespace celltrack::oracle

#endif
