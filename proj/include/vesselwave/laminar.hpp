/// @file laminar.hpp
/// @brief Closed-form laminar (w-independent) solution family H(z,xi) and the
///        Sturm-Liouville weight a(z,xi) it induces.
#pragma once

#include <vector>

#include "vesselwave/model.hpp"

namespace vesselwave {

/// Flow-force height of the rectangle: z0 = d(d c1 + 2 xi)/2.
double z0_of_xi(double xi, const ModelParams& params);

/// a(z,xi) = sqrt(xi^2 + 2 c1 (z0 - z)). a(z0) = xi, a(0) = xi + c1 d.
double coefficient_a(double z, double xi, const ModelParams& params);

/// da/dz = -c1/a.
double coefficient_a_z(double z, double xi, const ModelParams& params);

/// da/dxi holding z0 fixed: xi/a.
double coefficient_a_xi_fixed_z0(double z, double xi, const ModelParams& params);

/// da/dxi along the laminar family z0 = z0(xi): (xi + c1 d)/a.
double coefficient_a_xi_family(double z, double xi, const ModelParams& params);

/// Closed-form height H(z,xi) = -a(z)/c1 + d + xi/c1; H(0)=0, H(z0)=d.
double laminar_height(double z, double xi, const ModelParams& params);

struct LaminarProfile {
    double xi = 0.0;
    double z0 = 0.0;
    double Q = 0.0;  ///< Bernoulli head on the laminar branch (= xi)
    std::vector<double> z;   ///< n+1 uniform samples of [0, z0]
    std::vector<double> H;   ///< height samples
    std::vector<double> Hz;  ///< H_z = 1/a samples
    std::vector<double> a;   ///< coefficient samples
};

/// Samples the closed form on a uniform grid. Requires xi > 0 and n >= 8.
LaminarProfile laminar_profile(double xi, int n, const ModelParams& params);

struct LaminarOdeCheck {
    double max_ode_residual = 0.0;        ///< max |H_rk4 - H_closed| over the grid
    double surface_relation_residual = 0.0;  ///< |1 - [Q - 2(F1(H(z0)-d) - F1(0))] Hz(z0)|
};

/// Independent RK4 integration of H_zz = c1 H_z^3 from z=0 against the closed
/// form, plus the surface relation consistency value (reported, not asserted).
LaminarOdeCheck verify_laminar_ode(const LaminarProfile& profile, const ModelParams& params);

}  // namespace vesselwave
