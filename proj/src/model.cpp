/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "celltrack/model.hpp"

#include <cmath>
#include <sstream>

#include "celltrack/errors.hpp"

namespace celltrack {

namespace {

void check_theta(const ThetaParams &p)
{
    if (!(p.theta1 > 0.0 && p.theta1 < 1.0) || p.theta2 == 0.0) {
        std::ostringstream os;
        os << "degenerate parameters: theta1 = " << p.theta1
           << ", theta2 = " << p.theta2;
        throw DegenerateParamsError(os.str());
    }
    if (!(p.capacity > 0.0) || !(p.tau > 0.0)) {
        throw DegenerateParamsError("capacity and tau must be positive");
    }
}

void check_ecm(const EcmParams &e)
{
    if (!(e.r0 >= 0.0) || !(e.r1 > 0.0) || !(e.c1 > 0.0) || !(e.capacity > 0.0)) {
        throw DegenerateParamsError("ECM fields outside the valid domain");
    }
}

} // namespace

ModelState model_step(const ModelState &state, const ThetaParams &params, double u)
{
    return {
        state.s + params.tau / params.capacity * u,
        params.theta1 * state.o + params.theta2 * u,
    };
}

double model_output(const ModelState &state, const ThetaParams &params,
                    const EmfCurve &curve, double u)
{
    return curve.eval(state.s) + state.o + params.theta3 * u;
}

EcmParams theta_to_ecm(const ThetaParams &params)
{
    check_theta(params);
    double r1 = -params.theta2 / (params.theta1 - 1.0);
    double c1 = -(std::exp(-params.tau) * (params.theta1 - 1.0)) /
                (params.theta1 * params.theta2);
    return {params.theta3, r1, c1, params.capacity};
}

ThetaParams ecm_to_theta(const EcmParams &ecm, double tau)
{
    check_ecm(ecm);
    if (!(tau > 0.0)) {
        throw DegenerateParamsError("tau must be positive");
    }
    double theta1 = std::exp(-tau) / (ecm.r1 * ecm.c1);
    if (!(theta1 > 0.0 && theta1 < 1.0)) {
        std::ostringstream os;
        os << "ECM maps to theta1 = " << theta1 << " outside (0,1)";
        throw DegenerateParamsError(os.str());
    }
    double theta2 = ecm.r1 * (1.0 - theta1);
    return {theta1, theta2, ecm.r0, tau, ecm.capacity};
}

} // namespace celltrack
