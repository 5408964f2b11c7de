/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "celltrack/jekf.hpp"

#include <sstream>

#include "celltrack/errors.hpp"

namespace celltrack {

namespace {

constexpr double kTheta1Bound = 1.0 - 1e-6;

double theta1_of(const JekfState &state, const JekfConfig &cfg)
{
    return state.has_theta1() ? state.x(4) : cfg.theta1_fixed;
}

} // namespace

void validate(const JekfConfig &cfg)
{
    if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) {
        throw InvalidConfigError("gamma must be in (0,1]");
    }
    if (!(cfg.theta1_fixed > 0.0 && cfg.theta1_fixed < 1.0)) {
        throw InvalidConfigError("theta1_fixed must be in (0,1)");
    }
    if (!(cfg.tau > 0.0)) {
        throw InvalidConfigError("tau must be positive");
    }
    if (!(cfg.meas_noise_var > 0.0)) {
        throw InvalidConfigError("meas_noise_var must be positive");
    }
    for (double p : cfg.p0) {
        if (!(p > 0.0)) {
            throw InvalidConfigError("p0 entries must be positive");
        }
    }
    if (cfg.estimate_theta1 && !(cfg.theta1_p0 > 0.0)) {
        throw InvalidConfigError("theta1_p0 must be positive");
    }
}

JekfState jekf_init(const EmfCurve &curve, double first_voltage,
                    double capacity0, const JekfConfig &cfg)
{
    validate(cfg);
    if (!(capacity0 > 0.0)) {
        throw InvalidCapacityError("initial capacity must be positive");
    }
    long n = cfg.estimate_theta1 ? 5 : 4;
    JekfState st;
    st.x = Eigen::VectorXd::Zero(n);
    st.x(0) = curve.invert(first_voltage);
    st.x(1) = cfg.x0_overrides[0];
    st.x(2) = cfg.x0_overrides[1];
    st.x(3) = cfg.x0_overrides[2];
    st.P = Eigen::MatrixXd::Zero(n, n);
    for (long i = 0; i < 4; ++i) {
        st.P(i, i) = cfg.p0[static_cast<std::size_t>(i)];
    }
    if (cfg.estimate_theta1) {
        st.x(4) = cfg.theta1_fixed;
        st.P(4, 4) = cfg.theta1_p0;
    }
    st.capacity = capacity0;
    return st;
}

std::pair<Eigen::MatrixXd, Eigen::RowVectorXd> jekf_jacobians(
    const JekfState &state, double u, const EmfCurve &curve,
    const JekfConfig &cfg)
{
    long n = state.x.size();
    double th1 = theta1_of(state, cfg);

    Eigen::MatrixXd F = Eigen::MatrixXd::Identity(n, n);
    F(1, 1) = th1;
    F(1, 2) = u;
    if (state.has_theta1()) {
        F(1, 4) = state.x(1);
    }

    double s_pred = state.x(0) + cfg.tau / state.capacity * u;
    Eigen::RowVectorXd H = Eigen::RowVectorXd::Zero(n);
    H(0) = curve.derivative(s_pred);
    H(1) = 1.0;
    H(3) = u;
    return {F, H};
}

JekfStepResult jekf_step(const JekfState &state, double u, double y,
                         const EmfCurve &curve, const JekfConfig &cfg)
{
    long n = state.x.size();
    double th1 = theta1_of(state, cfg);

    Eigen::VectorXd xp = state.x;
    xp(0) = state.x(0) + cfg.tau / state.capacity * u;
    xp(1) = th1 * state.x(1) + state.x(2) * u;

    auto [F, H] = jekf_jacobians(state, u, curve, cfg);
    Eigen::MatrixXd Pp = F * state.P * F.transpose() / cfg.gamma;

    double y_hat = curve.eval(xp(0)) + xp(1) + xp(3) * u;
    double S = (H * Pp * H.transpose())(0) + cfg.meas_noise_var;
    if (!(S > 0.0)) {
        std::ostringstream os;
        os << "non-positive innovation variance " << S;
        throw NumericError(os.str());
    }
    Eigen::VectorXd K = Pp * H.transpose() / S;
    double innovation = y - y_hat;

    JekfState out;
    out.x = xp + K * innovation;
    Eigen::MatrixXd IKH = Eigen::MatrixXd::Identity(n, n) - K * H;
    out.P = IKH * Pp * IKH.transpose() + K * K.transpose() * cfg.meas_noise_var;
    out.P = 0.5 * (out.P + out.P.transpose()).eval();
    out.capacity = state.capacity;
    return {std::move(out), y_hat, innovation};
}

GuardResult stability_guard(const JekfState &state, const JekfConfig &cfg)
{
    if (!cfg.estimate_theta1 || !state.has_theta1() ||
        state.x(4) < kTheta1Bound) {
        return {state, false};
    }
    JekfState out = state;
    out.x(4) = kTheta1Bound;
    return {std::move(out), true};
}

JekfState set_capacity(const JekfState &state, double c0)
{
    if (!(c0 > 0.0)) {
        throw InvalidCapacityError("capacity must be positive");
    }
    JekfState out = state;
    out.capacity = c0;
    return out;
}

} // namespace celltrack
