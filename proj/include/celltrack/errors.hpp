/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_ERRORS_HPP
#define CELLTRACK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace celltrack {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* Violated configuration invariant (bad gamma, covariance, curve, ...). */
struct InvalidConfigError : Error {
    using Error::Error;
};

/* theta1 in {0,1}, theta2 = 0, or an ECM outside the convertible domain. */
struct DegenerateParamsError : Error {
    using Error::Error;
};

struct InvalidCapacityError : Error {
    using Error::Error;
};

/* Capacity window with zero SoC delta. */
struct DegenerateWindowError : Error {
    using Error::Error;
};

/* Covariance corruption: non-positive innovation variance. */
struct NumericError : Error {
    using Error::Error;
};

/* Simulator phase cannot be realized (unreachable CC target, SoC leaving [0,1]). */
struct InfeasiblePhaseError : Error {
    using Error::Error;
};

struct LengthMismatchError : Error {
    using Error::Error;
};

/* File ingest failure; message carries file and line. */
struct ParseError : Error {
    using Error::Error;
};

/* Mid-run abort (e.g. non-monotonic timestamps); message names the row. */
struct PipelineAbortError : Error {
    using Error::Error;
};

} // namespace celltrack

#endif
