/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_JEKF_HPP
#define CELLTRACK_JEKF_HPP

#include <array>
#include <utility>

#include <Eigen/Dense>

#include "celltrack/emf.hpp"

namespace celltrack {

struct JekfConfig {
    double gamma = 0.999;          // forgetting factor, (0,1]
    double theta1_fixed = 0.99;
    double tau = 1.0;              // seconds
    double meas_noise_var = 2.5e-5;   // volts^2
    bool estimate_theta1 = false;
    std::array<double, 3> x0_overrides = {0.0, 1e-4, 0.02};  // [o, th2, th3]
    std::array<double, 4> p0 = {1.0, 1.0, 1e-6, 4e-4};
    double theta1_p0 = 1e-7;       // used only when estimate_theta1
};

/* Throws InvalidConfigError on violated invariants. */
void validate(const JekfConfig &cfg);

/* Augmented state [s, o, th2, th3] (+th1 when estimated) with covariance
 * and the capacity currently used in the SoC propagation row. */
struct JekfState {
    Eigen::VectorXd x;
    Eigen::MatrixXd P;
    double capacity;

    bool has_theta1() const { return x.size() == 5; }
};

struct JekfStepResult {
    JekfState state;
    double y_hat;       // prediction before the update
    double innovation;  // y - y_hat
};

struct GuardResult {
    JekfState state;
    bool flagged;
};

/* s0 from inverting the first (rest) voltage; remaining entries and the
 * covariance diagonal come from the config. */
JekfState jekf_init(const EmfCurve &curve, double first_voltage,
                    double capacity0, const JekfConfig &cfg);

/*
 * One predict/update cycle against measurement y taken under current u.
 * Predict: x- from the model dynamics, P- = F P F^T / gamma (covariance
 * inflation realizes the forgetting factor; no process noise).
 * Update: scalar measurement y_hat = g(s-) + o- + th3-*u, Joseph-form
 * covariance update, symmetrization. Throws NumericError when the
 * innovation variance is non-positive.
 */
JekfStepResult jekf_step(const JekfState &state, double u, double y,
                         const EmfCurve &curve, const JekfConfig &cfg);

/* State-transition and measurement Jacobians at the given state and input,
 * evaluated exactly as jekf_step uses them (H at the predicted state). */
std::pair<Eigen::MatrixXd, Eigen::RowVectorXd> jekf_jacobians(
    const JekfState &state, double u, const EmfCurve &curve,
    const JekfConfig &cfg);

/* Clamps an estimated theta1 at 1 - 1e-6 and flags the sample; no-op in
 * fixed-theta1 mode. Keeps the overpotential dynamics contractive. */
GuardResult stability_guard(const JekfState &state, const JekfConfig &cfg);

/* Replaces the capacity used by the SoC propagation row; state vector and
 * covariance untouched. Throws InvalidCapacityError when c0 <= 0. */
JekfState set_capacity(const JekfState &state, double c0);

} // namespace celltrack

#endif
