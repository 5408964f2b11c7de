/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "celltrack/capacity.hpp"

#include <cmath>

#include "celltrack/errors.hpp"

namespace celltrack {

void validate(const SegmentPolicy &policy)
{
    if (!(policy.min_delta_soc > 0.0 && policy.min_delta_soc < 1.0)) {
        throw InvalidConfigError("min_delta_soc must be in (0,1)");
    }
    if (!(policy.charge_current_threshold > 0.0)) {
        throw InvalidConfigError("charge_current_threshold must be positive");
    }
    if (policy.max_gap_samples < 0) {
        throw InvalidConfigError("max_gap_samples must be non-negative");
    }
    if (!(policy.tau > 0.0)) {
        throw InvalidConfigError("tau must be positive");
    }
}

namespace {

SegmentStepResult charge_only_step(SegmentAccumulator acc,
                                   const SegmentPolicy &policy, double u,
                                   double s_hat)
{
    SegmentEvent event = SegmentEvent::None;
    std::optional<Window> window;

    if (!acc.active) {
        if (u > policy.charge_current_threshold) {
            acc.active = true;
            /* The opening sample's charge moved s_hat away from its
             * pre-step value, so the window anchors at the previous
             * sample's estimate. */
            acc.s_a = acc.have_prev ? acc.prev_s : s_hat;
            acc.charge_sum = policy.tau * u;
            acc.start_index = acc.index;
            acc.sample_count = 1;
            acc.gap_run = 0;
            event = SegmentEvent::Opened;
        }
    }
    else {
        acc.charge_sum += policy.tau * u;
        acc.sample_count += 1;
        if (u > policy.charge_current_threshold) {
            acc.gap_run = 0;
        }
        else {
            acc.gap_run += 1;
            if (acc.gap_run > policy.max_gap_samples) {
                double d = s_hat - acc.s_a;
                if (d > policy.min_delta_soc) {
                    window = Window{acc.s_a, s_hat, acc.charge_sum};
                    event = SegmentEvent::ClosedAccepted;
                }
                else {
                    event = SegmentEvent::ClosedDiscarded;
                }
                acc.active = false;
                acc.charge_sum = 0.0;
                acc.gap_run = 0;
                acc.sample_count = 0;
                acc.start_index = -1;
            }
        }
    }
    return {acc, window, event};
}

SegmentStepResult any_window_step(SegmentAccumulator acc,
                                  const SegmentPolicy &policy, double u,
                                  double s_hat)
{
    SegmentEvent event = SegmentEvent::None;
    std::optional<Window> window;

    if (acc.open_pending) {
        acc.active = true;
        acc.s_a = acc.have_prev ? acc.prev_s : s_hat;
        acc.charge_sum = 0.0;
        acc.start_index = acc.index;
        acc.sample_count = 0;
        acc.open_pending = false;
        event = SegmentEvent::Opened;
    }
    acc.charge_sum += policy.tau * u;
    acc.sample_count += 1;
    if (std::abs(s_hat - acc.s_a) > policy.min_delta_soc) {
        window = Window{acc.s_a, s_hat, acc.charge_sum};
        event = SegmentEvent::ClosedAccepted;
        /* Chain: the next sample re-opens anchored at this closing
         * estimate (it will be its predecessor's s_hat by then). */
        acc.active = false;
        acc.charge_sum = 0.0;
        acc.sample_count = 0;
        acc.open_pending = true;
    }
    return {acc, window, event};
}

} // namespace

SegmentStepResult segment_step(const SegmentAccumulator &acc,
                               const SegmentPolicy &policy, double u,
                               double s_hat)
{
    SegmentStepResult res = policy.mode == SegmentMode::ChargeOnly
                                ? charge_only_step(acc, policy, u, s_hat)
                                : any_window_step(acc, policy, u, s_hat);
    res.acc.prev_s = s_hat;
    res.acc.have_prev = true;
    res.acc.index += 1;
    return res;
}

void validate(const RlsState &rls)
{
    if (!(rls.c_hat > 0.0)) {
        throw InvalidConfigError("c_hat must be positive");
    }
    if (!(rls.p > 0.0)) {
        throw InvalidConfigError("p must be positive");
    }
    if (!(rls.lambda > 0.0 && rls.lambda <= 1.0)) {
        throw InvalidConfigError("lambda must be in (0,1]");
    }
}

RlsState rls_update(const RlsState &rls, const Window &w)
{
    double d = w.s_b - w.s_a;
    if (d == 0.0) {
        throw DegenerateWindowError("window has zero SoC delta");
    }
    /* p*(1 - k*d)/lambda == p/denom exactly; the factored form avoids the
     * cancellation in 1 - k*d when p is diffuse and k*d is within ulps of 1. */
    double denom = rls.lambda + d * rls.p * d;
    double k = rls.p * d / denom;
    RlsState out = rls;
    out.c_hat = rls.c_hat + k * (w.charge_sum - rls.c_hat * d);
    out.p = rls.p / denom;
    out.window_count = rls.window_count + 1;
    return out;
}

} // namespace celltrack
