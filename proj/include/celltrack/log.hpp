/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_LOG_HPP
#define CELLTRACK_LOG_HPP

#include <string>

namespace celltrack {

/* Non-fatal diagnostics go to stderr; estimation output never does. */
void log_warn(const std::string &msg);

} // namespace celltrack

#endif
