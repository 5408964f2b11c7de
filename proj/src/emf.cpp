/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "celltrack/emf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "celltrack/errors.hpp"
#include "celltrack/log.hpp"

namespace celltrack {

EmfCurve::EmfCurve(std::vector<double> soc, std::vector<double> voltage)
    : soc_(std::move(soc)), v_(std::move(voltage))
{
    if (soc_.size() != v_.size()) {
        throw InvalidConfigError("EMF curve: soc and voltage lengths differ");
    }
    if (soc_.size() < 2) {
        throw InvalidConfigError("EMF curve: need at least 2 points");
    }
    for (std::size_t i = 0; i + 1 < soc_.size(); ++i) {
        if (!(soc_[i] < soc_[i + 1])) {
            throw InvalidConfigError("EMF curve: soc not strictly increasing");
        }
        if (!(v_[i] < v_[i + 1])) {
            throw InvalidConfigError("EMF curve: voltage not strictly increasing");
        }
    }
    if (soc_.front() != 0.0 || soc_.back() != 1.0) {
        throw InvalidConfigError("EMF curve: must cover soc = 0 and soc = 1");
    }
}

std::size_t EmfCurve::segment(double s) const
{
    auto it = std::upper_bound(soc_.begin(), soc_.end(), s);
    long i = (it - soc_.begin()) - 1;
    i = std::clamp(i, 0L, static_cast<long>(soc_.size()) - 2);
    return static_cast<std::size_t>(i);
}

double EmfCurve::eval(double s) const
{
    double excess = s < 0.0 ? -s : (s > 1.0 ? s - 1.0 : 0.0);
    if (excess > 0.05) {
        std::ostringstream os;
        os << "EMF extrapolation at soc " << s;
        log_warn(os.str());
    }
    std::size_t i = segment(s);
    double w = (s - soc_[i]) / (soc_[i + 1] - soc_[i]);
    return v_[i] + (v_[i + 1] - v_[i]) * w;
}

double EmfCurve::derivative(double s) const
{
    std::size_t i = segment(s);
    return (v_[i + 1] - v_[i]) / (soc_[i + 1] - soc_[i]);
}

double EmfCurve::invert(double v) const
{
    if (v <= v_.front()) {
        return 0.0;
    }
    if (v >= v_.back()) {
        return 1.0;
    }
    auto it = std::upper_bound(v_.begin(), v_.end(), v);
    std::size_t i = static_cast<std::size_t>((it - v_.begin()) - 1);
    i = std::min(i, v_.size() - 2);
    double w = (v - v_[i]) / (v_[i + 1] - v_[i]);
    return soc_[i] + (soc_[i + 1] - soc_[i]) * w;
}

} // namespace celltrack
