/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "celltrack/log.hpp"

#include <iostream>

namespace celltrack {

void log_warn(const std::string &msg)
{
    std::cerr << "warning: " << msg << "\n";
}

} // namespace celltrack
