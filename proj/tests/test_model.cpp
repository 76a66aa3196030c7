/// @file test_model.cpp
/// @brief Body-force models, structural validation and derived constants.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vesselwave/model.hpp"

using namespace vesselwave;

namespace {

constexpr double kPi = 3.14159265358979323846;

ForceTable sample_table(double d, int nx, int ny, auto f1f, auto f2f, double ymax = 0.0) {
    ForceTable t;
    t.x.resize(nx);
    t.y.resize(ny);
    t.f1.resize(nx * ny);
    t.f2.resize(nx * ny);
    for (int i = 0; i < nx; ++i) t.x[i] = -kPi + 2 * kPi * i / (nx - 1);
    for (int j = 0; j < ny; ++j) t.y[j] = -d + (ymax + d) * j / (ny - 1);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            t.f1[i * ny + j] = f1f(t.x[i], t.y[j]);
            t.f2[i * ny + j] = f2f(t.x[i], t.y[j]);
        }
    return t;
}

}  // namespace

TEST_CASE("parameter invariants") {
    ModelParams p = ModelParams::reference();
    CHECK_NOTHROW(p.validate());
    p.d = -1;
    CHECK_THROWS_AS(p.validate(), config_error);
    p = ModelParams::reference();
    p.c3 = 0.5;  // breaks c3 = c1*d in physical mode
    CHECK_THROWS_AS(p.validate(), config_error);
    p.mode = ForceMode::Abstract;
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("constant vertical model evaluates exactly") {
    const auto m = BodyForceModel::constant_vertical(1.0);
    CHECK(m.f2(0.3, -0.05) == 1.0);
    CHECK(m.f1(0.3, -0.05) == 0.0);

    const auto m2 = BodyForceModel::constant_vertical(2.0);
    const double d = 1.0;
    CHECK(m2.potential(0.0, -d, d) == 0.0);
    CHECK(m2.potential(0.7, -0.25, d) == doctest::Approx(2.0 * (-0.25 + d)).epsilon(1e-15));
}

TEST_CASE("constant vertical model passes every structural check with residual 0") {
    ModelParams p = ModelParams::reference();
    const auto m = BodyForceModel::constant_vertical(p.c1);
    const auto rep = validate_body_force(m, p);
    CHECK(rep.pass());
    for (const auto& ch : rep.checks) CHECK(ch.max_residual <= 1e-14);
}

TEST_CASE("irrotationality violation is caught") {
    ModelParams p = ModelParams::reference();
    p.mode = ForceMode::Abstract;
    // f1 = sin(x) (y+d)^2 (vanishes at the bottom), f2 = c1: df1/dy + df2/dx != 0
    const auto t = sample_table(
        p.d, 81, 81, [&](double x, double y) { return std::sin(x) * (y + p.d) * (y + p.d); },
        [&](double, double) { return p.c1; });
    const auto m = BodyForceModel::tabulated(t);
    const auto rep = validate_body_force(m, p);
    CHECK_FALSE(rep.check("irrotational").pass);
}

TEST_CASE("non-constant f2 fails the laplacian-constant check") {
    ModelParams p = ModelParams::reference();
    p.mode = ForceMode::Abstract;
    const auto t = sample_table(
        p.d, 41, 41, [](double, double) { return 0.0; },
        [](double, double y) { return 1.0 + y * y; });
    const auto m = BodyForceModel::tabulated(t);
    const auto rep = validate_body_force(m, p);
    CHECK_FALSE(rep.check("laplacian-constant").pass);
    CHECK(rep.check("irrotational").pass);
}

TEST_CASE("negative force fails nonnegativity") {
    ModelParams p = ModelParams::reference();
    p.mode = ForceMode::Abstract;
    const auto t = sample_table(
        p.d, 21, 21, [](double, double) { return 0.0; },
        [](double x, double) { return -0.5 + 0.1 * x; });
    const auto rep = validate_body_force(BodyForceModel::tabulated(t), p);
    CHECK_FALSE(rep.check("nonnegativity").pass);
}

TEST_CASE("derived constants for the constant model") {
    ModelParams p = ModelParams::reference();  // c1 = 1, d = 0.1
    const auto m = BodyForceModel::constant_vertical(p.c1);
    const auto [c2, c3] = derive_constants(m, p);
    CHECK(c2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(c3 == doctest::Approx(0.1).epsilon(1e-12));

    ModelParams p2;
    p2.d = 1.0;
    p2.c1 = 2.0;
    p2.c2 = 2.0;
    p2.c3 = 2.0;
    const auto m2 = BodyForceModel::constant_vertical(p2.c1);
    const auto [c2b, c3b] = derive_constants(m2, p2);
    CHECK(c2b == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c3b == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("x-dependent boundary constant is rejected") {
    ModelParams p = ModelParams::reference();
    p.mode = ForceMode::Abstract;
    const auto t = sample_table(
        p.d, 41, 41, [](double, double) { return 0.0; },
        [](double x, double) { return 1.0 + 0.01 * std::cos(x); });
    const auto m = BodyForceModel::tabulated(t);
    CHECK_THROWS_AS(derive_constants(m, p), config_error);
}

TEST_CASE("tabulated grid validation") {
    ForceTable t;
    t.x = {0.0, 1.0};
    t.y = {0.0, -1.0};  // not increasing
    t.f1 = {0, 0, 0, 0};
    t.f2 = {1, 1, 1, 1};
    CHECK_THROWS_AS(BodyForceModel::tabulated(t), config_error);
    t.y = {0.0, 1.0};
    t.f1.pop_back();  // not rectangular
    CHECK_THROWS_AS(BodyForceModel::tabulated(t), config_error);
}
