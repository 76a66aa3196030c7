/// @file spectral.hpp
/// @brief Linearized Sturm-Liouville problem on (0, z0):
///
///          (a^3 M_z)_z = -mu a M,   M(0) = 0,   M_z(z0) = beta M(z0)
///
///        with a(z,xi) the laminar weight and beta = c2 / (xi (Q/2 - c3)),
///        Q = xi. Provides mu(xi) by two independent routes (tridiagonal
///        matrix + shooting), the bifurcation point mu(xi*) = -1, the depth
///        condition, kernel dimension and the transversality pairing.
#pragma once

#include <utility>
#include <vector>

#include "vesselwave/model.hpp"

namespace vesselwave {

struct SLProblem {
    double xi = 0.0;
    int k = 1;          ///< Fourier mode label (metadata; mode-k solvable iff mu = -k^2)
    double beta = 0.0;  ///< Robin coefficient at z = z0
    double z0 = 0.0;
    int n = 0;                ///< grid intervals
    std::vector<double> z;    ///< n+1 samples of [0, z0]
    std::vector<double> a;    ///< coefficient samples
    ModelParams params;

    /// beta = c2 / (xi (xi/2 - c3)); construction fails unless xi/2 > c3.
    static SLProblem build(double xi, int k, int n, const ModelParams& params);
    /// Same grid, caller-supplied beta (for experiments / the Neumann oracle).
    static SLProblem build_with_beta(double xi, int k, int n, double beta,
                                     const ModelParams& params);
};

enum class EigenMethod { Shooting, Matrix };

struct EigenResult {
    double mu = 0.0;
    std::vector<double> z;  ///< eigenfunction grid
    std::vector<double> M;  ///< eigenfunction, M(0)=0, normalized M(z0)=1
    EigenMethod method = EigenMethod::Matrix;
    double residual = 0.0;           ///< method residual (|zeta(0)| or eigen-equation norm)
    double boundary_residual = 0.0;  ///< discrete flux-condition residual at z0
};

/// [int a^3 zeta_z^2 - beta a^3(z0) zeta^2(z0)] / int a zeta^2 with centered
/// differences and trapezoid quadrature. zeta sampled on the problem grid.
double rayleigh_quotient(const std::vector<double>& zeta, const SLProblem& problem);

/// Smallest eigenvalue via the flux-form finite-volume tridiagonal pencil.
/// With extrapolate (default) the eigenvalue is Richardson-extrapolated from
/// n/2 and n; the eigenfunction is the fine-grid one.
EigenResult mu_matrix(const SLProblem& problem, bool extrapolate = true);

/// Smallest eigenvalue by shooting: integrate (a^3 zeta_z)_z = -mu a zeta from
/// z0 down with zeta(z0)=1, zeta_z(z0)=beta; root of zeta(0) on the lowest branch.
EigenResult mu_shooting(const SLProblem& problem, double tol = 1e-13);

struct DepthCondition {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Explicit smallness condition on the channel depth favoring a mu = -1 crossing.
DepthCondition depth_condition(const ModelParams& params);

struct XiStarReport {
    double xi_star = 0.0;
    double mu_at_root = 0.0;
    double slope = 0.0;  ///< d mu / d xi at the crossing, central differences
    bool monotone_through_crossing = false;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    int n_roots = 0;  ///< crossings found in the scan (the analysis predicts 1)
    std::vector<std::pair<double, double>> scan;  ///< (xi, mu), sorted in xi
    DepthCondition depth;
    bool depth_warning = false;  ///< scan proceeded although the condition fails
};

/// Scans mu(xi) on n_scan points of [xi_lo, xi_hi], refines every sign change
/// of mu + 1 by bisection to |mu+1| <= 1e-10. Throws numerical_error when no
/// crossing exists in the range.
XiStarReport find_xi_star(const ModelParams& params, double xi_lo, double xi_hi, int n_scan,
                          int n_grid = 1024);

/// Cosine coefficients m_k(z), k = 0..kmax, of an even 2pi-periodic grid
/// function g[i][j] sampled at w_i = -pi + 2 pi i / nw (i = 0..nw, first and
/// last column identified). m_0 is the mean; m_k = (1/pi) int g cos(kw) dw.
/// Throws config_error when the odd-part energy exceeds tol.
std::vector<std::vector<double>> cosine_decompose(const std::vector<std::vector<double>>& g,
                                                  int kmax, double tol = 1e-10);

struct KernelModeEntry {
    int k = 0;
    bool admits_nontrivial = false;
    double detail = 0.0;  ///< k=0: int a^-3; k>=1: mu(xi*) + k^2
};

struct KernelReport {
    double xi_star = 0.0;
    double mu = 0.0;
    double integral_a_minus3 = 0.0;
    std::vector<KernelModeEntry> modes;
    int dimension = 0;
};

/// Mode-by-mode solvability at xi*: k=1 iff mu(xi*) = -1; k >= 2 excluded by
/// mu(xi*) > -k^2; k = 0 excluded by int a^-3 > 0 forcing the constant A0 = 0.
KernelReport kernel_report(double xi_star, int kmax, const ModelParams& params, int n_grid = 2048);

struct TransversalityResult {
    double T = 0.0;      ///< extrapolated pairing integral
    double T_raw = 0.0;  ///< fine-grid value
    double area_term = 0.0;
    double boundary_term = 0.0;
    double lower_bound_expr = 0.0;  ///< {2c2 + [sqrt3 - c2 (xi/2-c3)^-1] xi} int zeta*^2 dw
    double zeta_norm2 = 0.0;        ///< ||zeta*||^2 over the rectangle
};

/// T = int_R a^3 zeta* 2 xi (a^-4 zeta*_ww + 3 a^-3 a_z zeta*_z) dw dz
///   + int_BT [2 c2 zeta*^2 + xi^2 zeta* zeta*_z] dw,  zeta* = M(z) cos w,
/// with a_z = -c1/a. Computes M internally at n and n/2 and extrapolates.
TransversalityResult transversality(double xi_star, const ModelParams& params, int n = 4096);

}  // namespace vesselwave
