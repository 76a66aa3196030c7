/// @file reconstruct.hpp
/// @brief Inversion of the flow-force change of variables: physical velocity,
///        pressure and surface fields from a height field, with conservation
///        audits.
#pragma once

#include <vector>

#include "vesselwave/field.hpp"
#include "vesselwave/model.hpp"

namespace vesselwave {

/// Physical fields on the mapped grid x = w, y = h(w,z) - d.
struct PhysicalFields {
    int nw = 0, nz = 0;
    double Q = 0.0;
    double p0 = 0.0;                ///< flux int (u-c) dy of the first column
    std::vector<double> x;          ///< nw+1 samples of [-pi, pi]
    std::vector<double> omega;      ///< surface elevation, nw+1
    std::vector<double> y, u, v, p; ///< (nw+1)*(nz+1), index i*(nz+1)+m
    std::vector<double> F;          ///< potential relative to the mean surface level
    double& at(std::vector<double>& f, int i, int m) { return f[i * (nz + 1) + m]; }
};

/// Pointwise algebraic inversion: with s1 = -h_w/h_z, s2 = 1/h_z and
/// K = Q - 2 (F - F0) - 2 s2, solve alpha^4 + K alpha^2 - s1^2 = 0 for
/// alpha = u - c < 0, then v = -s1/alpha and p = rho (s2 - alpha^2).
/// Throws numerical_error when the inversion breaks down (alpha^2 <= 0).
PhysicalFields physical_fields(const HeightField& field, const BodyForceModel& force,
                               const ModelParams& params);

struct FlowDiagnostics {
    double bernoulli_range = 0.0;      ///< (a) max-min of (u-c)^2+v^2+2p/rho+2(F-F0)
    double bernoulli_max_dev = 0.0;    ///< (a) max |... - Q|
    double flow_force_range = 0.0;     ///< (b) max-min over columns of int [p/rho+(u-c)^2] dy
    double flow_force_mean = 0.0;
    double flux_range = 0.0;           ///< (c) max-min over columns of int (u-c) dy
    double flux_mean = 0.0;
    double divergence_max = 0.0;       ///< (d) max |u_x + v_y|
    double curl_max = 0.0;             ///< (d) max |u_y - v_x|
    double stagnation_margin = 0.0;    ///< (e) min (c - u)
    double surface_pressure_max = 0.0; ///< max |p| on the free surface
    double omega_mean = 0.0;           ///< mean surface elevation over the period
};

/// Conservation audits of the reconstructed fields: Bernoulli constancy,
/// column-wise flow force and flux, kinematic residuals on the mapped grid,
/// stagnation margin. All findings are reported, none thrown.
FlowDiagnostics diagnostics(const PhysicalFields& fields, const HeightField& field,
                            const ModelParams& params);

}  // namespace vesselwave
