/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_EMF_HPP
#define CELLTRACK_EMF_HPP

#include <cstddef>
#include <vector>

namespace celltrack {

/*
 * Piecewise-linear EMF table g(s). Both coordinates strictly increasing,
 * SoC endpoints 0 and 1 included; monotonicity makes inversion unique.
 */
class EmfCurve {
  public:
    EmfCurve(std::vector<double> soc, std::vector<double> voltage);

    /* Interpolates; outside [0,1] extrapolates the end segment (logged
     * when more than 0.05 beyond the range). */
    double eval(double s) const;

    /* Slope of the segment containing s; right segment at knots, left
     * segment at s = 1. */
    double derivative(double s) const;

    /* Unique inverse of eval on [0,1]; clamps for v outside the span. */
    double invert(double v) const;

    double voltage_min() const { return v_.front(); }
    double voltage_max() const { return v_.back(); }
    std::size_t size() const { return soc_.size(); }
    const std::vector<double> &soc() const { return soc_; }
    const std::vector<double> &voltage() const { return v_; }

  private:
    std::size_t segment(double s) const;

    std::vector<double> soc_;
    std::vector<double> v_;
};

} // namespace celltrack

#endif
