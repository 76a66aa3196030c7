/// @file test_laminar.cpp
/// @brief Laminar family: closed form vs an independent RK4 integration, the
///        coefficient a and its derivative variants.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vesselwave/laminar.hpp"

using namespace vesselwave;

namespace {
ModelParams unit_params() {  // c1 = 1, d = 1 (physical mode)
    ModelParams p;
    p.d = 1.0;
    p.c1 = 1.0;
    p.c2 = 1.0;
    p.c3 = 1.0;
    return p;
}
}  // namespace

TEST_CASE("z0 formula") {
    auto p = unit_params();
    CHECK(z0_of_xi(1.0, p) == doctest::Approx(1.5).epsilon(1e-15));
    ModelParams r = ModelParams::reference();
    CHECK(z0_of_xi(2.2, r) == doctest::Approx(0.225).epsilon(1e-14));
    CHECK(z0_of_xi(1e-12, p) == doctest::Approx(0.5).epsilon(1e-9));  // limit d^2 c1 / 2
    CHECK_THROWS_AS(z0_of_xi(-1.0, p), config_error);
    // dz0/dxi = d exactly, by central differences
    const double h = 1e-6;
    CHECK((z0_of_xi(1.0 + h, p) - z0_of_xi(1.0 - h, p)) / (2 * h) ==
          doctest::Approx(p.d).epsilon(1e-9));
}

TEST_CASE("coefficient a and derivative variants") {
    auto p = unit_params();
    const double xi = 1.0;
    const double z0 = z0_of_xi(xi, p);
    CHECK(coefficient_a(z0, xi, p) == doctest::Approx(xi).epsilon(1e-15));
    CHECK(coefficient_a(0.0, xi, p) == doctest::Approx(2.0).epsilon(1e-15));  // sqrt(1+2*1.5)

    // a_z = -c1/a, cross-checked by central differences
    for (double z : {0.2, 0.7, 1.2}) {
        const double h = 1e-6;
        const double fd = (coefficient_a(z + h, xi, p) - coefficient_a(z - h, xi, p)) / (2 * h);
        CHECK(coefficient_a_z(z, xi, p) == doctest::Approx(fd).epsilon(1e-8));
        CHECK(coefficient_a_z(z, xi, p) ==
              doctest::Approx(-p.c1 / coefficient_a(z, xi, p)).epsilon(1e-15));
    }

    // da/dxi variants: fixed z0 vs along the family z0(xi)
    const double z = 0.6, h = 1e-6;
    auto a_fixed = [&](double x) { return std::sqrt(x * x + 2 * p.c1 * (z0 - z)); };
    CHECK(coefficient_a_xi_fixed_z0(z, xi, p) ==
          doctest::Approx((a_fixed(xi + h) - a_fixed(xi - h)) / (2 * h)).epsilon(1e-8));
    auto a_family = [&](double x) { return coefficient_a(z, x, p); };
    CHECK(coefficient_a_xi_family(z, xi, p) ==
          doctest::Approx((a_family(xi + h) - a_family(xi - h)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("closed-form profile hits its boundary values") {
    auto p = unit_params();
    const auto prof = laminar_profile(1.0, 1000, p);
    CHECK(prof.z0 == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(std::abs(prof.H.front()) <= 1e-12);
    CHECK(std::abs(prof.H.back() - p.d) <= 1e-12);
    CHECK(prof.Q == 1.0);

    // H(0.75) = 2 - sqrt(2.5)
    CHECK(laminar_height(0.75, 1.0, p) == doctest::Approx(0.41886116991581024).epsilon(1e-14));

    // strictly increasing, Hz = 1/a > 0
    for (std::size_t i = 0; i + 1 < prof.H.size(); ++i) CHECK(prof.H[i + 1] > prof.H[i]);
    for (std::size_t i = 0; i < prof.Hz.size(); ++i) {
        CHECK(prof.Hz[i] > 0.0);
        CHECK(prof.Hz[i] == doctest::Approx(1.0 / prof.a[i]).epsilon(1e-15));
    }

    ModelParams r = ModelParams::reference();
    const auto pr = laminar_profile(2.2, 64, r);
    CHECK(pr.Hz.back() == doctest::Approx(1.0 / 2.2).epsilon(1e-14));

    CHECK_THROWS_AS(laminar_profile(-1.0, 64, p), config_error);
    CHECK_THROWS_AS(laminar_profile(1.0, 4, p), config_error);
}

TEST_CASE("RK4 oracle matches the closed form at fourth order") {
    auto p = unit_params();
    const auto prof = laminar_profile(1.0, 1000, p);
    const auto chk = verify_laminar_ode(prof, p);
    CHECK(chk.max_ode_residual <= 1e-8);
    CHECK(chk.surface_relation_residual <= 1e-12);

    // doubling resolution shrinks the residual ~16x
    const auto chk2 = verify_laminar_ode(laminar_profile(1.0, 2000, p), p);
    const double ratio = chk.max_ode_residual / chk2.max_ode_residual;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}
