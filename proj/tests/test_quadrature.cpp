#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ifperf/errors.hpp"
#include "ifperf/quadrature.hpp"

#include <cmath>
#include <limits>

using ifperf::integrate_adaptive;
using ifperf::QuadratureSpec;

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

TEST_CASE("exponential decay integrates to one") {
    auto r = integrate_adaptive([](double t) { return std::exp(-t); }, 0.0, inf);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.error_estimate <= 1e-9);
}

TEST_CASE("polynomial on a finite interval") {
    auto r = integrate_adaptive([](double t) { return t * t; }, 0.0, 1.0);
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("gaussian tail") {
    auto r = integrate_adaptive(
        [](double t) { return std::exp(-0.5 * t * t); }, 0.0, inf);
    CHECK(r.value == doctest::Approx(1.2533141373155003).epsilon(1e-12));
}

TEST_CASE("upper gamma integrand at negative order") {
    // int_1^inf z^{-2.5} e^{-z} dz, reference value to 17 digits
    auto r = integrate_adaptive(
        [](double z) { return std::pow(z, -2.5) * std::exp(-z); }, 1.0, inf);
    CHECK(r.value == doctest::Approx(0.12648781959325442).epsilon(1e-12));
}

TEST_CASE("requested tolerance is honored") {
    QuadratureSpec spec;
    spec.rel_tol = 1e-13;
    auto r = integrate_adaptive(
        [](double t) { return std::cos(t) * std::exp(-t); }, 0.0, inf, spec);
    // exact value 1/2
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("non-integrable singularity is reported, not returned") {
    CHECK_THROWS_AS(
        integrate_adaptive([](double t) { return 1.0 / t; }, 0.0, 1.0),
        ifperf::QuadratureError);
}

TEST_CASE("inverted interval is rejected") {
    CHECK_THROWS_AS(
        integrate_adaptive([](double t) { return t; }, 1.0, 0.0),
        ifperf::QuadratureError);
}
