/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "celltrack/pipeline.hpp"

#include <cmath>
#include <sstream>

#include "celltrack/errors.hpp"
#include "celltrack/log.hpp"

namespace celltrack {

namespace {

/* Allowed excursion of measured voltage beyond the EMF span. */
constexpr double kVoltageSpanMargin = 0.5;
constexpr double kRestStartWindowSeconds = 60.0;

SegmentPolicy resolve_policy(const PipelineConfig &cfg)
{
    SegmentPolicy policy = cfg.policy;
    if (policy.charge_current_threshold <= 0.0) {
        policy.charge_current_threshold = 0.05 * cfg.nominal_capacity / 3600.0;
    }
    policy.tau = cfg.jekf.tau;
    validate(policy);
    return policy;
}

} // namespace

PipelineRunner::PipelineRunner(const EmfCurve &curve,
                               const PipelineConfig &cfg)
    : curve_(curve), cfg_(cfg), policy_(resolve_policy(cfg)),
      jekf_{Eigen::VectorXd(), Eigen::MatrixXd(), cfg.nominal_capacity},
      rls_{cfg.nominal_capacity, cfg.rls_p_init, cfg.rls_lambda, 0}
{
    validate(cfg_.jekf);
    if (!(cfg_.nominal_capacity > 0.0)) {
        throw InvalidConfigError("nominal_capacity must be positive");
    }
    if (!(cfg_.rls_lambda > 0.0 && cfg_.rls_lambda <= 1.0)) {
        throw InvalidConfigError("rls_lambda must be in (0,1]");
    }
    if (!(cfg_.rls_p_init > 0.0)) {
        throw InvalidConfigError("rls_p_init must be positive");
    }
}

EstimateRecord PipelineRunner::step(const Sample &smp)
{
    if (seen_ == 0) {
        jekf_ = jekf_init(curve_, smp.y, cfg_.nominal_capacity, cfg_.jekf);
        t0_ = smp.t;
    }
    else if (!(smp.t > prev_t_)) {
        std::ostringstream os;
        os << "non-monotonic timestamp at row " << seen_ + 1 << " (t = "
           << smp.t << " after " << prev_t_ << ")";
        throw PipelineAbortError(os.str());
    }
    if (!rest_logged_ && smp.t - t0_ < kRestStartWindowSeconds &&
        std::abs(smp.u) > policy_.charge_current_threshold) {
        log_warn("stream does not start at rest; initial SoC may be off");
        rest_logged_ = true;
    }
    if (!span_logged_ && (smp.y < curve_.voltage_min() - kVoltageSpanMargin ||
                          smp.y > curve_.voltage_max() + kVoltageSpanMargin)) {
        std::ostringstream os;
        os << "voltage " << smp.y << " V outside EMF span at row "
           << seen_ + 1;
        log_warn(os.str());
        span_logged_ = true;
    }
    prev_t_ = smp.t;
    seen_ += 1;

    JekfStepResult step = jekf_step(jekf_, smp.u, smp.y, curve_, cfg_.jekf);
    jekf_ = std::move(step.state);
    GuardResult guard = stability_guard(jekf_, cfg_.jekf);
    jekf_ = std::move(guard.state);
    sum_.stability_flags += guard.flagged ? 1 : 0;

    SegmentStepResult seg = segment_step(acc_, policy_, smp.u, jekf_.x(0));
    acc_ = seg.acc;
    switch (seg.event) {
    case SegmentEvent::Opened:
        sum_.segments_opened += 1;
        break;
    case SegmentEvent::ClosedAccepted:
        sum_.segments_accepted += 1;
        break;
    case SegmentEvent::ClosedDiscarded:
        sum_.segments_discarded += 1;
        break;
    case SegmentEvent::None:
        break;
    }
    if (seg.window && cfg_.capacity_updates_enabled) {
        rls_ = rls_update(rls_, *seg.window);
        /* Takes effect from the next sample; this step already ran. */
        jekf_ = set_capacity(jekf_, rls_.c_hat);
    }

    EstimateRecord rec;
    rec.t = smp.t;
    rec.s_hat = jekf_.x(0);
    rec.o_hat = jekf_.x(1);
    rec.theta1 = jekf_.has_theta1() ? jekf_.x(4) : cfg_.jekf.theta1_fixed;
    rec.theta2 = jekf_.x(2);
    rec.theta3 = jekf_.x(3);
    rec.y_hat = step.y_hat;
    rec.innovation = step.innovation;
    rec.c_hat = jekf_.capacity;
    rec.segment_event = seg.event;
    rec.stability_flag = guard.flagged;

    sq_err_ += step.innovation * step.innovation;
    th2_sum_ += jekf_.x(2);
    th3_sum_ += jekf_.x(3);
    return rec;
}

RunSummary PipelineRunner::summary() const
{
    RunSummary sum = sum_;
    sum.samples = seen_;
    if (seen_ > 0) {
        double n = static_cast<double>(seen_);
        sum.rms_voltage_error = std::sqrt(sq_err_ / n);
        sum.mean_theta2 = th2_sum_ / n;
        sum.mean_theta3 = th3_sum_ / n;
    }
    sum.c_hat_final = jekf_.capacity;
    sum.segment_open_at_eof = acc_.active;
    return sum;
}

RunSummary pipeline_run(const std::vector<Sample> &samples,
                        const EmfCurve &curve, const PipelineConfig &cfg,
                        const RecordSink &sink)
{
    if (samples.empty()) {
        throw PipelineAbortError("empty sample stream");
    }
    PipelineRunner runner(curve, cfg);
    for (const Sample &smp : samples) {
        EstimateRecord rec = runner.step(smp);
        if (sink) {
            sink(rec);
        }
    }
    return runner.summary();
}

RunSummary pipeline_run(const std::vector<Sample> &samples,
                        const EmfCurve &curve, const PipelineConfig &cfg,
                        std::vector<EstimateRecord> &records)
{
    records.clear();
    records.reserve(samples.size());
    return pipeline_run(samples, curve, cfg,
                        [&records](const EstimateRecord &rec) {
                            records.push_back(rec);
                        });
}

double compute_rms_error(const std::vector<EstimateRecord> &records,
                         const std::vector<double> &measured)
{
    if (records.size() != measured.size()) {
        throw LengthMismatchError("records and measurements differ in length");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        double e = measured[i] - records[i].y_hat;
        sq += e * e;
    }
    return records.empty() ? 0.0
                           : std::sqrt(sq / static_cast<double>(records.size()));
}

AgingReport run_aging_suite(const std::vector<std::vector<Sample>> &datasets,
                            const EmfCurve &curve, const PipelineConfig &cfg)
{
    if (datasets.size() < 2) {
        throw InvalidConfigError("aging suite needs at least 2 datasets");
    }
    AgingReport report;
    for (const auto &ds : datasets) {
        RunSummary sum = pipeline_run(ds, curve, cfg, RecordSink{});
        report.rows.push_back({sum.samples, sum.c_hat_final, sum.mean_theta2,
                               sum.mean_theta3, sum.rms_voltage_error});
    }
    report.capacity_decreasing = true;
    report.theta2_increasing = true;
    report.theta3_increasing = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        const AgingRow &a = report.rows[i - 1];
        const AgingRow &b = report.rows[i];
        report.capacity_decreasing &= b.c_hat_final < a.c_hat_final;
        report.theta2_increasing &= b.mean_theta2 > a.mean_theta2;
        report.theta3_increasing &= b.mean_theta3 > a.mean_theta3;
    }
    return report;
}

} // namespace celltrack
