/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cmath>

#include "doctest.h"

#include "celltrack/emf.hpp"
#include "celltrack/errors.hpp"
#include "celltrack/rng.hpp"
#include "celltrack/simulator.hpp"

using namespace celltrack;

namespace {

EmfCurve two_point()
{
    return EmfCurve({0.0, 1.0}, {3.0, 4.2});
}

EmfCurve three_point()
{
    return EmfCurve({0.0, 0.5, 1.0}, {3.0, 3.5, 4.2});
}

} // namespace

TEST_CASE("eval interpolates linearly")
{
    CHECK(two_point().eval(0.5) == doctest::Approx(3.6).epsilon(1e-12));
    CHECK(three_point().eval(0.25) == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("eval extrapolates the end segment")
{
    CHECK(two_point().eval(1.1) == doctest::Approx(4.32).epsilon(1e-12));
    CHECK(two_point().eval(-0.1) == doctest::Approx(2.88).epsilon(1e-12));
}

TEST_CASE("derivative uses the segment slope with right-knot convention")
{
    CHECK(two_point().derivative(0.3) == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(three_point().derivative(0.5) == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(three_point().derivative(0.2) == doctest::Approx(1.0).epsilon(1e-12));
    // at s = 1 there is no right segment; the left one applies
    CHECK(three_point().derivative(1.0) == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(three_point().derivative(0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("invert is the exact inverse and clamps outside the span")
{
    CHECK(two_point().invert(3.6) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(two_point().invert(2.9) == 0.0);
    CHECK(two_point().invert(4.3) == 1.0);
}

TEST_CASE("invert(eval(s)) is the identity on [0,1]")
{
    EmfCurve curves[] = {two_point(), three_point(), default_emf_curve()};
    Rng rng(42);
    for (const EmfCurve &curve : curves) {
        for (int i = 0; i < 1000; ++i) {
            double s = rng.uniform01();
            CHECK(curve.invert(curve.eval(s)) == doctest::Approx(s).epsilon(1e-12));
        }
    }
}

TEST_CASE("curve validation rejects malformed tables")
{
    CHECK_THROWS_AS(EmfCurve({0.0}, {3.0}), InvalidConfigError);
    CHECK_THROWS_AS(EmfCurve({0.0, 0.5}, {3.0, 3.5}), InvalidConfigError);
    CHECK_THROWS_AS(EmfCurve({0.2, 1.0}, {3.0, 4.2}), InvalidConfigError);
    CHECK_THROWS_AS(EmfCurve({0.0, 0.5, 0.5, 1.0}, {3.0, 3.2, 3.4, 4.2}),
                    InvalidConfigError);
    CHECK_THROWS_AS(EmfCurve({0.0, 0.5, 1.0}, {3.0, 3.6, 3.5}),
                    InvalidConfigError);
    CHECK_THROWS_AS(EmfCurve({0.0, 1.0}, {3.0, 4.2, 4.3}), InvalidConfigError);
}

TEST_CASE("default curve is valid and spans 3.0-4.2 V")
{
    EmfCurve curve = default_emf_curve();
    CHECK(curve.size() == 21);
    CHECK(curve.voltage_min() == 3.0);
    CHECK(curve.voltage_max() == 4.2);
    // the deliberately flat stretch near 80% SoC
    CHECK(curve.derivative(0.78) < 0.4);
}
