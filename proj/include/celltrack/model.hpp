/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_MODEL_HPP
#define CELLTRACK_MODEL_HPP

#include <optional>

#include "celltrack/emf.hpp"

namespace celltrack {

/* One telemetry row. Positive current charges the cell. */
struct Sample {
    double t;                    // seconds, strictly increasing per stream
    double u;                    // amperes
    double y;                    // volts
    std::optional<double> temp;  // degC, carried but unused
};

/* Discrete first-order cell parametrization. */
struct ThetaParams {
    double theta1;    // relaxation rate, in (0,1)
    double theta2;    // ohms, overpotential gain per ampere
    double theta3;    // ohms, instantaneous resistance
    double tau;       // seconds, sample period
    double capacity;  // ampere-seconds
};

/* 1-RC equivalent circuit. */
struct EcmParams {
    double r0;        // ohms
    double r1;        // ohms
    double c1;        // farads
    double capacity;  // ampere-seconds
};

struct ModelState {
    double s;  // SoC fraction, unclamped during propagation
    double o;  // volts, dynamic overpotential
};

/* s' = s + (tau/C0)*u;  o' = theta1*o + theta2*u. */
ModelState model_step(const ModelState &state, const ThetaParams &params, double u);

/* Terminal voltage g(s) + o + theta3*u. */
double model_output(const ModelState &state, const ThetaParams &params,
                    const EmfCurve &curve, double u);

/* R0 = theta3;  R1 = -theta2/(theta1-1);  C1 = -(e^-tau (theta1-1))/(theta1 theta2).
 * Throws DegenerateParamsError outside theta1 in (0,1), theta2 != 0. */
EcmParams theta_to_ecm(const ThetaParams &params);

/* Algebraic inverse of theta_to_ecm; throws DegenerateParamsError when the
 * resulting theta1 falls outside (0,1) or the ECM is invalid. */
ThetaParams ecm_to_theta(const EcmParams &ecm, double tau);

} // namespace celltrack

#endif
