/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_CAPACITY_HPP
#define CELLTRACK_CAPACITY_HPP

#include <optional>

namespace celltrack {

enum class SegmentMode {
    ChargeOnly,    // windows are contiguous charging sessions
    AnySoCWindow,  // windows close on |delta s_hat| regardless of current sign
};

struct SegmentPolicy {
    SegmentMode mode = SegmentMode::ChargeOnly;
    double min_delta_soc = 0.2;
    double charge_current_threshold;  // amperes; 0.05*C0/3600 by convention
    int max_gap_samples = 5;
    double tau = 1.0;                 // seconds per sample
};

/* Throws InvalidConfigError on violated invariants. */
void validate(const SegmentPolicy &policy);

/* A completed SoC window: integrated charge q over [a,b] against the
 * estimated SoC travel d = s_b - s_a. */
struct Window {
    double s_a;
    double s_b;
    double charge_sum;  // ampere-seconds, tau * sum(u)
};

enum class SegmentEvent {
    None,
    Opened,
    ClosedAccepted,
    ClosedDiscarded,
};

struct SegmentAccumulator {
    bool active = false;
    double s_a = 0.0;
    double charge_sum = 0.0;      // ampere-seconds accumulated while active
    long start_index = -1;
    long sample_count = 0;        // samples inside the active segment
    int gap_run = 0;              // consecutive below-threshold samples
    long index = 0;               // running input position
    bool have_prev = false;
    double prev_s = 0.0;
    bool open_pending = true;     // AnySoCWindow: next sample starts a window
};

struct SegmentStepResult {
    SegmentAccumulator acc;
    std::optional<Window> window;
    SegmentEvent event;
};

/*
 * Advances the cycle-detection state machine by one sample of (u, s_hat).
 * ChargeOnly: opens when u exceeds the threshold (window start anchored at
 * the previous sample's s_hat), accumulates tau*u while open, closes after
 * a run of more than max_gap_samples below-threshold samples, and emits the
 * window only when s_b - s_a > min_delta_soc. AnySoCWindow: always active;
 * closes as soon as |s_hat - s_a| > min_delta_soc, emits every window, and
 * chains the next window from the closing sample.
 */
SegmentStepResult segment_step(const SegmentAccumulator &acc,
                               const SegmentPolicy &policy, double u,
                               double s_hat);

/* Scalar capacity RLS with forgetting factor lambda. */
struct RlsState {
    double c_hat;          // ampere-seconds
    double p;              // As^2 per SoC^2
    double lambda;         // (0,1]
    long window_count = 0;
};

/* Throws InvalidConfigError on violated invariants. */
void validate(const RlsState &rls);

/*
 * k = p d / (lambda + d p d);  c_hat += k (q - c_hat d);  p = (p - k d p)/lambda.
 * Throws DegenerateWindowError when the window's SoC delta is zero.
 */
RlsState rls_update(const RlsState &rls, const Window &w);

} // namespace celltrack

#endif
