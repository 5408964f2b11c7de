/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "celltrack/simulator.hpp"

#include <cmath>
#include <sstream>

#include "celltrack/errors.hpp"
#include "celltrack/rng.hpp"

namespace celltrack {

namespace {

constexpr double kTau = 1.0;
constexpr double kDriveBlockSeconds = 10.0;

void validate(const TruthCellConfig &cell)
{
    if (!(cell.ecm.r0 >= 0.0) || !(cell.ecm.r1 > 0.0) ||
        !(cell.ecm.c1 > 0.0) || !(cell.ecm.capacity > 0.0)) {
        throw InvalidConfigError("truth cell ECM outside the valid domain");
    }
    if (!(cell.s_init >= 0.0 && cell.s_init <= 1.0)) {
        throw InvalidConfigError("s_init must be in [0,1]");
    }
    if (cell.voltage_noise_std < 0.0 || cell.current_noise_std < 0.0) {
        throw InvalidConfigError("noise levels must be non-negative");
    }
}

void validate(const CycleSpec &spec)
{
    if (spec.repeat_count < 1) {
        throw InvalidConfigError("repeat_count must be at least 1");
    }
    for (const Phase &ph : spec.phases) {
        if (const auto *d = std::get_if<DrivePulse>(&ph)) {
            if (!(d->duration_s > 0.0) || d->variability_a < 0.0) {
                throw InvalidConfigError("drive phase invalid");
            }
        }
        else if (const auto *r = std::get_if<Rest>(&ph)) {
            if (!(r->duration_s > 0.0)) {
                throw InvalidConfigError("rest duration must be positive");
            }
        }
        else if (const auto *cc = std::get_if<CcCharge>(&ph)) {
            if (!(cc->current_a > 0.0)) {
                throw InvalidConfigError("CC current must be positive");
            }
        }
        else if (const auto *cv = std::get_if<CvHold>(&ph)) {
            if (!(cv->cutoff_a > 0.0)) {
                throw InvalidConfigError("CV cutoff must be positive");
            }
        }
    }
}

/* Truth-cell integrator: emits the sample from the pre-step state under
 * the applied current, then advances the state. */
class CellSim {
  public:
    CellSim(const TruthCellConfig &cell, SimResult &out)
        : cell_(cell), theta_(ecm_to_theta(cell.ecm, kTau)), rng_(cell.seed),
          out_(out), s_(cell.s_init)
    {
    }

    double soc() const { return s_; }
    double overpotential() const { return o_; }
    const ThetaParams &theta() const { return theta_; }

    double terminal_voltage(double u) const
    {
        return cell_.emf.eval(s_) + o_ + theta_.theta3 * u;
    }

    void emit(double u)
    {
        double y = terminal_voltage(u);
        double u_meas = u + cell_.current_noise_std * rng_.gauss();
        double y_meas = y + cell_.voltage_noise_std * rng_.gauss();
        out_.samples.push_back({t_, u_meas, y_meas, std::nullopt});
        out_.truth.push_back({t_, s_, o_});
        s_ += kTau * u / theta_.capacity;
        o_ = theta_.theta1 * o_ + theta_.theta2 * u;
        t_ += kTau;
        if (s_ < -1e-9 || s_ > 1.0 + 1e-9) {
            std::ostringstream os;
            os << "SoC left [0,1] at t = " << t_ << " (s = " << s_ << ")";
            throw InfeasiblePhaseError(os.str());
        }
    }

  private:
    const TruthCellConfig &cell_;
    ThetaParams theta_;
    Rng rng_;
    SimResult &out_;
    double s_;
    double o_ = 0.0;
    double t_ = 0.0;
};

void run_phase(CellSim &sim, const DrivePulse &ph, Rng &rng)
{
    double remaining = ph.duration_s;
    while (remaining > 0.0) {
        double block = std::min(kDriveBlockSeconds, remaining);
        double u = ph.mean_a + ph.variability_a * rng.uniform_sym();
        for (long i = 0; i < static_cast<long>(block); ++i) {
            sim.emit(u);
        }
        remaining -= block;
    }
}

void run_phase(CellSim &sim, const Rest &ph)
{
    for (long i = 0; i < static_cast<long>(ph.duration_s); ++i) {
        sim.emit(0.0);
    }
}

void run_phase(CellSim &sim, const CcCharge &ph, const TruthCellConfig &cell)
{
    if (cell.emf.eval(sim.soc()) >= ph.target_v) {
        std::ostringstream os;
        os << "CC target " << ph.target_v << " V not above EMF at soc "
           << sim.soc();
        throw InfeasiblePhaseError(os.str());
    }
    while (sim.terminal_voltage(ph.current_a) < ph.target_v) {
        sim.emit(ph.current_a);
    }
}

void run_phase(CellSim &sim, const CvHold &ph)
{
    while (true) {
        /* Current that pins the noiseless terminal voltage at the target. */
        double u = (ph.target_v - sim.terminal_voltage(0.0)) /
                   sim.theta().theta3;
        if (u <= ph.cutoff_a) {
            break;
        }
        sim.emit(u);
    }
}

} // namespace

SimResult generate_cycle(const CycleSpec &spec, const TruthCellConfig &cell)
{
    validate(cell);
    validate(spec);

    SimResult out;
    CellSim sim(cell, out);
    out.theta = sim.theta();
    /* Separate stream for the load profile so noise draws do not shift
     * the drive pattern. */
    Rng drive_rng(cell.seed ^ 0x9e3779b97f4a7c15ULL);

    for (int rep = 0; rep < spec.repeat_count; ++rep) {
        for (const Phase &ph : spec.phases) {
            if (const auto *d = std::get_if<DrivePulse>(&ph)) {
                run_phase(sim, *d, drive_rng);
            }
            else if (const auto *r = std::get_if<Rest>(&ph)) {
                run_phase(sim, *r);
            }
            else if (const auto *cc = std::get_if<CcCharge>(&ph)) {
                run_phase(sim, *cc, cell);
            }
            else {
                run_phase(sim, std::get<CvHold>(ph));
            }
        }
    }
    return out;
}

TruthCellConfig aging_variant(const TruthCellConfig &cell,
                              double capacity_scale, double r_scale)
{
    if (!(capacity_scale > 0.0) || !(r_scale > 0.0)) {
        throw InvalidConfigError("aging scales must be positive");
    }
    TruthCellConfig out = cell;
    out.ecm.capacity *= capacity_scale;
    out.ecm.r0 *= r_scale;
    out.ecm.r1 *= r_scale;
    return out;
}

EmfCurve default_emf_curve()
{
    return EmfCurve(
        {0.00, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50,
         0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.00},
        {3.00, 3.15, 3.27, 3.36, 3.43, 3.49, 3.54, 3.59, 3.63, 3.67, 3.71,
         3.75, 3.79, 3.83, 3.87, 3.905, 3.92, 3.935, 3.99, 4.08, 4.20});
}

} // namespace celltrack
