/// @file field.hpp
/// @brief The quasilinear height-function system on the fixed rectangle
///        [-pi,pi] x [0,1] (sigma = z/z0):
///
///          (1+h_w^2) h_zz - 2 h_z h_w h_wz + h_z^2 h_ww = c1 h_z^3
///          1 + h_w^2 = [Q - 2 F(w, h-d)] h_z + 2 F0 / Q      on z = z0
///          h = 0                                             on z = 0
///          mean_w h(w, z0) = d
///
///        with F the body-force potential and F0 = F(.,0) its surface offset.
///        The constant term 2 F0/Q makes the laminar family with Q = xi an
///        exact root while keeping the classical linearized boundary operator
///        2 f2/xi - (xi - 2 c3) d/dz at the laminar state; see the README
///        discussion of the head convention.
///
///        Newton continuation of the nontrivial branch emanating from the
///        discrete bifurcation point, solved on the even half-period.
#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "vesselwave/model.hpp"
#include "vesselwave/spectral.hpp"

namespace vesselwave {

/// Grid function h(w, sigma) on [-pi,pi] x [0,1]. Columns are stored for the
/// nw unique periodic nodes w_i = -pi + 2 pi i / nw; accessors wrap.
struct HeightField {
    int nw = 0;  ///< periodic w intervals (even)
    int nz = 0;  ///< sigma intervals
    double z0 = 0.0;
    double Q = 0.0;
    ModelParams params;
    std::vector<double> h;  ///< nw * (nz+1), index iw(i)*(nz+1) + m

    HeightField() = default;
    HeightField(int nw_, int nz_, double z0_, double Q_, const ModelParams& p);

    int iw(int i) const {
        const int r = i % nw;
        return r < 0 ? r + nw : r;
    }
    double& at(int i, int m) { return h[iw(i) * (nz + 1) + m]; }
    double at(int i, int m) const { return h[iw(i) * (nz + 1) + m]; }
    double w(int i) const;      ///< -pi + 2 pi i / nw
    double sigma(int m) const { return static_cast<double>(m) / nz; }

    /// h_z = h_sigma/z0 at a node (centered interior, one-sided at the edges).
    double hz(int i, int m) const;
    /// Minimum of h_z over all nodes.
    double min_hz() const;
    /// Surface samples h(w_i, z0) - are the free surface once d is subtracted.
    std::vector<double> surface() const;
};

struct ResidualBundle {
    std::vector<double> interior;  ///< nw*(nz-1), row-major over (i, m=1..nz-1)
    std::vector<double> top;       ///< nw
    double mass = 0.0;
    double interior_norm = 0.0;  ///< inf-norms
    double top_norm = 0.0;
    double total_norm = 0.0;
};

/// Evaluates all residual rows. Throws stagnation_error when h_z <= 0 anywhere.
ResidualBundle residual(const HeightField& field, const BodyForceModel& force,
                        const ModelParams& params);

/// Square sparse Jacobian of residual() on the full periodic grid.
/// Unknown order: h(i=0..nw-1, m=1..nz) then Q; rows: interior, top, mass.
/// z0 is held fixed (it is problem data for this operator).
Eigen::SparseMatrix<double> assemble_jacobian(const HeightField& field,
                                              const BodyForceModel& force,
                                              const ModelParams& params);

/// Even-subspace restriction of assemble_jacobian: unknowns on the half
/// period w in [0, pi] (nh = nw/2+1 columns) plus Q; same row types.
Eigen::MatrixXd assemble_even_jacobian(const HeightField& field, const BodyForceModel& force,
                                       const ModelParams& params);

/// Discrete setting for the branch: the w-independent solution family member
/// at the grid's own bifurcation point and its exact discrete kernel mode.
struct WaveSetup {
    ModelParams params;
    BodyForceModel force = BodyForceModel::constant_vertical(1.0);
    int nw = 0, nz = 0;
    double xi_disc = 0.0;  ///< family parameter of the bifurcation member
    double z0 = 0.0;       ///< rectangle height at branch start
    double Q0 = 0.0;       ///< head of the laminar member
    std::vector<double> h_lam;  ///< nz+1 samples, h_lam[0] = 0
    std::vector<double> M;      ///< nz+1 kernel z-profile, M[nz] = 1
    double kappa1 = 0.0;        ///< discrete symbol of -d^2/dw^2 on mode 1
    double xi_spectral = 0.0;   ///< the continuum xi* used as the hint
    double kernel_gap = 0.0;    ///< max |M - M_spectral| (consistency diagnostic)
};

/// Solves the w-independent discrete system (interior + top + mass) at fixed
/// z0 for (g, Q). Returns h_lam samples and Q.
std::pair<std::vector<double>, double> discrete_laminar(double z0, int nz,
                                                        const BodyForceModel& force,
                                                        const ModelParams& params);

/// Locates the grid's bifurcation point near the spectral xi*: the sign change
/// of det of the Fourier mode-1 block of the Jacobian along the w-independent
/// family, then extracts the kernel profile by inverse iteration.
WaveSetup locate_discrete_bifurcation(double xi_star, const EigenResult& M_spectral, int nw,
                                      int nz, const BodyForceModel& force,
                                      const ModelParams& params);

struct NewtonOptions {
    double tol = 1e-11;  ///< residual inf-norm target
    int max_iter = 40;
    int max_backtrack = 8;
};

struct NewtonResult {
    HeightField field;
    double Q = 0.0;
    double z0 = 0.0;
    int iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
};

/// Damped Newton on the bordered even-half-period system at fixed kernel
/// amplitude eps. Unknowns: deviation from the setup laminar, Q and z0; rows:
/// interior + top + mass + amplitude. `initial` may be empty (predictor
/// h_lam + eps M cos w) or a caller-supplied starting field.
NewtonResult newton_solve(const WaveSetup& setup, double eps, const HeightField* initial = nullptr,
                          const NewtonOptions& opts = {});

struct BranchRecord {
    int step = 0;
    double eps = 0.0;
    double Q = 0.0;
    double z0 = 0.0;
    double surf_min = 0.0, surf_max = 0.0;
    int newton_iters = 0;
    double residual_norm = 0.0;
};

struct Branch {
    WaveSetup setup;
    std::vector<BranchRecord> records;
    std::vector<HeightField> checkpoints;  ///< one per record
};

/// Natural-parameter continuation in the amplitude: eps = step * d_eps from 0,
/// secant predictor, step-halving retries on failure. Record 0 is the
/// w-independent laminar member.
Branch continue_branch(double xi_star, const EigenResult& M_spectral, int n_steps, double d_eps,
                       int nw, int nz, const BodyForceModel& force, const ModelParams& params,
                       const NewtonOptions& opts = {});

struct OperatorCheck {
    double gap_interior = 0.0;  ///< assembled Jacobian vs analytic linearized operator
    double gap_boundary = 0.0;
    /// FD d/dxi of the Jacobian along the fixed-z0 path vs the true derivative
    /// of that path (classical form plus the surface-potential motion term).
    double gap_xi_fixed = 0.0;
    /// FD along the z0(xi) family vs the classical operator derivative: the
    /// convention discrepancy, meaningful as a report rather than a bound.
    double gap_xi_family = 0.0;
    double scale = 0.0;  ///< inf-norm of the analytic operator output
};

/// Consistency of the assembled Jacobian at the laminar state with the
/// analytic linearization and its xi-derivative on deterministic test fields.
OperatorCheck linearized_operator_check(double xi, int nw, int nz, const BodyForceModel& force,
                                        const ModelParams& params, double delta_xi = 1e-4);

}  // namespace vesselwave
