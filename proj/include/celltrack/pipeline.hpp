/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_PIPELINE_HPP
#define CELLTRACK_PIPELINE_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "celltrack/capacity.hpp"
#include "celltrack/emf.hpp"
#include "celltrack/jekf.hpp"
#include "celltrack/model.hpp"

namespace celltrack {

struct PipelineConfig {
    JekfConfig jekf;
    SegmentPolicy policy;          // threshold <= 0 selects 0.05*C0/3600
    double rls_lambda = 0.7;
    double rls_p_init = 1e9;
    bool capacity_updates_enabled = true;
    double nominal_capacity = 0.0; // ampere-seconds, required

    PipelineConfig() { policy.charge_current_threshold = 0.0; }
};

/* One row per input sample. */
struct EstimateRecord {
    double t;
    double s_hat;
    double o_hat;
    double theta1;
    double theta2;
    double theta3;
    double y_hat;            // pre-update prediction
    double innovation;
    double c_hat;            // ampere-seconds in effect after this sample
    SegmentEvent segment_event;
    bool stability_flag;
};

struct RunSummary {
    std::size_t samples = 0;
    double rms_voltage_error = 0.0;  // volts, over pre-update predictions
    double c_hat_final = 0.0;        // ampere-seconds
    double mean_theta2 = 0.0;
    double mean_theta3 = 0.0;
    long segments_opened = 0;
    long segments_accepted = 0;
    long segments_discarded = 0;
    long stability_flags = 0;
    bool segment_open_at_eof = false;
};

using RecordSink = std::function<void(const EstimateRecord &)>;

/*
 * Incremental form of the coupled estimator: initializes the JEKF from the
 * first sample's voltage, steps it per sample, runs segment detection on
 * the estimated SoC, and on every accepted window updates the capacity RLS
 * and (when enabled) pushes the estimate back into the JEKF, taking effect
 * from the next sample. step() aborts on non-monotonic timestamps, naming
 * the offending row. Offline and streaming transports share this class, so
 * their records are identical by construction.
 */
class PipelineRunner {
  public:
    PipelineRunner(const EmfCurve &curve, const PipelineConfig &cfg);

    EstimateRecord step(const Sample &smp);

    /* Snapshot over the samples seen so far. */
    RunSummary summary() const;

  private:
    EmfCurve curve_;
    PipelineConfig cfg_;
    SegmentPolicy policy_;
    JekfState jekf_;
    SegmentAccumulator acc_;
    RlsState rls_;
    RunSummary sum_;
    std::size_t seen_ = 0;
    double t0_ = 0.0;
    double prev_t_ = 0.0;
    double sq_err_ = 0.0;
    double th2_sum_ = 0.0;
    double th3_sum_ = 0.0;
    bool rest_logged_ = false;
    bool span_logged_ = false;
};

/* Runs a PipelineRunner over the whole stream, feeding each record to the
 * sink. Throws PipelineAbortError on an empty stream. */
RunSummary pipeline_run(const std::vector<Sample> &samples,
                        const EmfCurve &curve, const PipelineConfig &cfg,
                        const RecordSink &sink);

/* Convenience wrapper collecting the records. */
RunSummary pipeline_run(const std::vector<Sample> &samples,
                        const EmfCurve &curve, const PipelineConfig &cfg,
                        std::vector<EstimateRecord> &records);

/* sqrt(mean((y - y_hat)^2)); throws LengthMismatchError. */
double compute_rms_error(const std::vector<EstimateRecord> &records,
                         const std::vector<double> &measured);

struct AgingRow {
    std::size_t samples = 0;
    double c_hat_final = 0.0;   // ampere-seconds
    double mean_theta2 = 0.0;
    double mean_theta3 = 0.0;
    double rms_voltage_error = 0.0;
};

/* Rows in input order plus monotonicity verdicts across that order. */
struct AgingReport {
    std::vector<AgingRow> rows;
    bool capacity_decreasing = false;
    bool theta2_increasing = false;
    bool theta3_increasing = false;
};

/* Runs the pipeline over each dataset with the same config; requires at
 * least two datasets. No sorting: verdicts follow the given order. */
AgingReport run_aging_suite(const std::vector<std::vector<Sample>> &datasets,
                            const EmfCurve &curve, const PipelineConfig &cfg);

} // namespace celltrack

#endif
