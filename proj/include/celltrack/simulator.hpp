/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_SIMULATOR_HPP
#define CELLTRACK_SIMULATOR_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include "celltrack/emf.hpp"
#include "celltrack/model.hpp"

namespace celltrack {

/* Ground-truth 1-RC cell the telemetry is generated from. */
struct TruthCellConfig {
    EcmParams ecm;
    EmfCurve emf;
    double s_init;
    double voltage_noise_std = 1e-3;  // volts
    double current_noise_std = 0.0;   // amperes
    std::uint64_t seed = 1;
};

/* Seeded piecewise-constant load, redrawn in 10 s blocks.
 * Discharge is expressed as a negative mean. */
struct DrivePulse {
    double duration_s;
    double mean_a;
    double variability_a;
};

struct Rest {
    double duration_s;
};

/* Holds current until the terminal voltage reaches target_v. */
struct CcCharge {
    double current_a;  // positive
    double target_v;
};

/* Holds terminal voltage at target_v (closed-form current for the 1-RC
 * model) until the current tapers to cutoff_a. */
struct CvHold {
    double target_v;
    double cutoff_a;  // positive
};

using Phase = std::variant<DrivePulse, Rest, CcCharge, CvHold>;

struct CycleSpec {
    std::vector<Phase> phases;
    int repeat_count = 1;
};

/* Noiseless internal state alongside each emitted sample. */
struct TruthRecord {
    double t;
    double soc;
    double overpotential;
};

struct SimResult {
    std::vector<Sample> samples;
    std::vector<TruthRecord> truth;
    ThetaParams theta;  // truth-cell parameters, for oracle comparisons
};

/*
 * Simulates the truth cell at tau = 1 s: SoC by exact coulomb counting,
 * overpotential by the discrete RC recursion, terminal voltage from the
 * model output plus configured noise. Each sample is emitted from the
 * pre-step state under the current input. Throws InfeasiblePhaseError when
 * a CC target is unreachable or SoC leaves [0,1]; never clips silently.
 */
SimResult generate_cycle(const CycleSpec &spec, const TruthCellConfig &cell);

/* Copy with capacity*capacity_scale and R0, R1 scaled by r_scale. */
TruthCellConfig aging_variant(const TruthCellConfig &cell,
                              double capacity_scale, double r_scale);

/* 21-point monotone curve spanning 3.0-4.2 V with a flat region near 80%
 * SoC, the default truth EMF. */
EmfCurve default_emf_curve();

} // namespace celltrack

#endif
