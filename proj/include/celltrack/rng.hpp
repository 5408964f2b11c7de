/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_RNG_HPP
#define CELLTRACK_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace celltrack {

/*
 * Seeded generator with a fixed bit mapping. std::*_distribution is
 * implementation-defined, which would break bit-reproducibility across
 * toolchains; the mapping and Box-Muller transform are spelled out here.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /* Uniform in [0, 1), 53-bit resolution. */
    double uniform01()
    {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /* Uniform in [-1, 1). */
    double uniform_sym()
    {
        return 2.0 * uniform01() - 1.0;
    }

    /* Standard normal via Box-Muller; pairs are cached. */
    double gauss()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace celltrack

#endif
