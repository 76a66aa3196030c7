#include "vesselwave/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "vesselwave/laminar.hpp"
#include "vesselwave/tridiagonal.hpp"

namespace vesselwave {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

SLProblem SLProblem::build(double xi, int k, int n, const ModelParams& params) {
    if (!(xi / 2.0 > params.c3))
        throw config_error("boundary coefficient undefined: need xi/2 > c3");
    const double beta = params.c2 / (xi * (xi / 2.0 - params.c3));
    return build_with_beta(xi, k, n, beta, params);
}

SLProblem SLProblem::build_with_beta(double xi, int k, int n, double beta,
                                     const ModelParams& params) {
    params.validate();
    if (!(xi > 0.0)) throw config_error("xi must be positive");
    if (k < 0) throw config_error("Fourier mode k must be nonnegative");
    if (n < 8) throw config_error("grid too coarse");
    SLProblem p;
    p.xi = xi;
    p.k = k;
    p.beta = beta;
    p.n = n;
    p.z0 = z0_of_xi(xi, params);
    p.params = params;
    p.z.resize(n + 1);
    p.a.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        p.z[i] = p.z0 * static_cast<double>(i) / n;
        p.a[i] = coefficient_a(p.z[i], xi, params);
    }
    return p;
}

double rayleigh_quotient(const std::vector<double>& zeta, const SLProblem& problem) {
    const int n = problem.n;
    if (static_cast<int>(zeta.size()) != n + 1) throw config_error("zeta size mismatch");
    if (std::abs(zeta[0]) > 1e-12 * (1.0 + std::abs(zeta[n])))
        throw config_error("zeta(0) must vanish");
    const double h = problem.z0 / n;

    std::vector<double> dz(n + 1);
    dz[0] = (-3 * zeta[0] + 4 * zeta[1] - zeta[2]) / (2 * h);
    for (int i = 1; i < n; ++i) dz[i] = (zeta[i + 1] - zeta[i - 1]) / (2 * h);
    dz[n] = (3 * zeta[n] - 4 * zeta[n - 1] + zeta[n - 2]) / (2 * h);

    double num = 0.0, den = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 * h : h;
        const double a = problem.a[i];
        num += w * a * a * a * dz[i] * dz[i];
        den += w * a * zeta[i] * zeta[i];
    }
    const double atop = problem.a[n];
    num -= problem.beta * atop * atop * atop * zeta[n] * zeta[n];
    if (den == 0.0) throw config_error("zero denominator in the quotient");
    return num / den;
}

namespace {

struct Pencil {
    std::vector<double> diag, off;  // symmetric tridiagonal after the diagonal-weight transform
    std::vector<double> w;          // lumped weights
};

// Conservative flux-form discretization of (a^3 M_z)_z + mu a M = 0 with
// M(0) = 0 and the Robin flux a^3 M_z = beta a^3 M folded into the top cell.
Pencil assemble_pencil(const SLProblem& p, int n) {
    const double h = p.z0 / n;
    auto a_of = [&](double z) { return coefficient_a(z, p.xi, p.params); };
    std::vector<double> am(n);  // a^3 at interval midpoints
    for (int i = 0; i < n; ++i) {
        const double zm = (static_cast<double>(i) + 0.5) * h;
        const double a = a_of(std::min(zm, p.z0));
        am[i] = a * a * a;
    }
    Pencil out;
    out.diag.resize(n);
    out.off.resize(n - 1);
    out.w.resize(n);
    for (int i = 1; i < n; ++i) {
        out.diag[i - 1] = (am[i - 1] + am[i]) / h;
        out.w[i - 1] = a_of(static_cast<double>(i) * h) * h;
    }
    for (int i = 1; i < n; ++i) out.off[i - 1] = -am[i] / h;
    const double atop = a_of(p.z0);
    out.diag[n - 1] = am[n - 1] / h - p.beta * atop * atop * atop;
    out.w[n - 1] = atop * h / 2.0;
    // symmetrize with the diagonal mass: C = W^{-1/2} K W^{-1/2}
    for (int i = 0; i < n; ++i) out.diag[i] /= out.w[i];
    for (int i = 0; i + 1 < n; ++i) out.off[i] /= std::sqrt(out.w[i] * out.w[i + 1]);
    return out;
}

double pencil_smallest_mu(const SLProblem& p, int n) {
    const Pencil pc = assemble_pencil(p, n);
    return smallest_eigenvalue(pc.diag, pc.off);
}

}  // namespace

EigenResult mu_matrix(const SLProblem& problem, bool extrapolate) {
    if (problem.n < 32) throw config_error("mu_matrix needs n >= 32");
    const int n = problem.n;
    const Pencil pc = assemble_pencil(problem, n);
    const double mu_fine = smallest_eigenvalue(pc.diag, pc.off);

    // eigenvector on the fine grid, seeded with a quarter-wave shape
    std::vector<double> seed(n);
    for (int i = 0; i < n; ++i) seed[i] = std::sin(0.5 * kPi * (i + 1.0) / n);
    std::vector<double> y = inverse_iteration(pc.diag, pc.off, mu_fine, std::move(seed));

    EigenResult r;
    r.method = EigenMethod::Matrix;
    r.z = problem.z;
    r.M.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) r.M[i + 1] = y[i] / std::sqrt(pc.w[i]);
    const double top = r.M[n];
    if (top == 0.0) throw numerical_error("degenerate eigenvector");
    for (auto& v : r.M) v /= top;

    // eigen-equation residual of the symmetrized pencil, relative
    double res = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
        double t = (pc.diag[i] - mu_fine) * y[i];
        if (i > 0) t += pc.off[i - 1] * y[i - 1];
        if (i + 1 < n) t += pc.off[i] * y[i + 1];
        res = std::max(res, std::abs(t));
        scale = std::max(scale, std::abs(pc.diag[i]));
    }
    r.residual = res / scale;

    // discrete flux condition at the top cell: the scheme's implied boundary
    // derivative against beta M(z0)
    const double atop3 = std::pow(problem.a[n], 3);
    const double h = problem.z0 / n;
    const double am_last = std::pow(coefficient_a(problem.z0 - 0.5 * h, problem.xi, problem.params), 3);
    const double mz_top = (am_last * (r.M[n] - r.M[n - 1]) / h -
                           mu_fine * problem.a[n] * (h / 2.0) * r.M[n]) / atop3;
    r.boundary_residual = std::abs(mz_top - problem.beta * r.M[n]);

    r.mu = mu_fine;
    if (extrapolate) {
        const double mu_coarse = pencil_smallest_mu(problem, n / 2);
        r.mu = mu_fine + (mu_fine - mu_coarse) / 3.0;
    }
    return r;
}

namespace {

struct ShootResult {
    double zeta0 = 0.0;     // zeta at z = 0
    int sign_changes = 0;   // sign changes along the integration
    double amplitude = 1.0; // max |zeta| encountered
};

// RK4 on (zeta, eta = a^3 zeta_z) from z0 down to 0 storing the trace.
ShootResult shoot(double mu, const SLProblem& p, std::vector<double>* trace = nullptr) {
    const int n = p.n;
    const double h = p.z0 / n;
    auto a3 = [&](double z) {
        const double a = coefficient_a(std::clamp(z, 0.0, p.z0), p.xi, p.params);
        return a * a * a;
    };
    auto aw = [&](double z) { return coefficient_a(std::clamp(z, 0.0, p.z0), p.xi, p.params); };

    double zeta = 1.0;
    double eta = a3(p.z0) * p.beta;
    if (trace) {
        trace->assign(n + 1, 0.0);
        (*trace)[n] = zeta;
    }
    ShootResult out;
    double prev = zeta;
    for (int i = n; i-- > 0;) {
        const double z1 = p.z0 * (i + 1.0) / n;
        const double step = -h;
        auto f = [&](double z, double ze, double et, double& dze, double& det) {
            dze = et / a3(z);
            det = -mu * aw(z) * ze;
        };
        double k1z, k1e, k2z, k2e, k3z, k3e, k4z, k4e;
        f(z1, zeta, eta, k1z, k1e);
        f(z1 + 0.5 * step, zeta + 0.5 * step * k1z, eta + 0.5 * step * k1e, k2z, k2e);
        f(z1 + 0.5 * step, zeta + 0.5 * step * k2z, eta + 0.5 * step * k2e, k3z, k3e);
        f(z1 + step, zeta + step * k3z, eta + step * k3e, k4z, k4e);
        zeta += step / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z);
        eta += step / 6.0 * (k1e + 2 * k2e + 2 * k3e + k4e);
        if (trace) (*trace)[i] = zeta;
        if (zeta * prev < 0.0) ++out.sign_changes;
        if (zeta != 0.0) prev = zeta;
        out.amplitude = std::max(out.amplitude, std::abs(zeta));
    }
    out.zeta0 = zeta;
    return out;
}

}  // namespace

EigenResult mu_shooting(const SLProblem& problem, double tol) {
    if (problem.n < 32) throw config_error("mu_shooting needs n >= 32");
    auto f = [&](double mu) { return shoot(mu, problem); };

    // below-spectrum point: no sign changes and zeta(0) > 0
    double lo = -1.0;
    ShootResult rlo = f(lo);
    int guard = 0;
    while (!(rlo.sign_changes == 0 && rlo.zeta0 > 0.0)) {
        lo *= 2.0;
        rlo = f(lo);
        if (++guard > 60) throw numerical_error("no lower bracket for the shooting eigenvalue");
    }
    // predicate "at or above the first eigenvalue"
    auto above = [&](const ShootResult& r) { return r.sign_changes >= 1 || r.zeta0 < 0.0; };
    // walk up in doubling steps from lo
    const double scale0 = std::max(1.0, problem.xi * problem.xi *
                                            std::pow(kPi / (2.0 * problem.z0), 2));
    double step = std::max(1.0, std::abs(lo) * 0.5);
    double hi = lo + step;
    ShootResult rhi = f(hi);
    guard = 0;
    while (!above(rhi)) {
        lo = hi;
        step = std::min(2.0 * step, scale0);
        hi += step;
        rhi = f(hi);
        if (++guard > 400) throw numerical_error("no sign change in the scanned mu window");
    }
    // bisection on the predicate: isolates the lowest eigenvalue
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (above(f(mid)))
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
    }
    // secant polish on zeta(0) within [lo, hi]
    double m0 = lo, m1 = hi;
    double f0 = f(m0).zeta0, f1 = f(m1).zeta0;
    double mu = m1, fres = f1, amp = 1.0;
    for (int it = 0; it < 60; ++it) {
        if (f1 == f0) break;
        const double m2 = m1 - f1 * (m1 - m0) / (f1 - f0);
        if (!(m2 > lo - (hi - lo) && m2 < hi + (hi - lo))) break;
        const ShootResult r2 = f(m2);
        m0 = m1;
        f0 = f1;
        m1 = m2;
        f1 = r2.zeta0;
        mu = m2;
        fres = r2.zeta0;
        amp = r2.amplitude;
        if (std::abs(fres) <= tol * amp) break;
    }

    std::vector<double> trace;
    const ShootResult rfin = shoot(mu, problem, &trace);
    EigenResult r;
    r.method = EigenMethod::Shooting;
    r.mu = mu;
    r.z = problem.z;
    r.M = std::move(trace);
    r.M[0] = rfin.zeta0;  // residual-level leftover, reported below
    r.residual = std::abs(rfin.zeta0) / rfin.amplitude;
    r.boundary_residual = 0.0;  // zeta_z(z0) = beta zeta(z0) is the initial data
    if (r.residual > std::max(tol * 100.0, 1e-9))
        throw numerical_error("shooting root did not converge");
    return r;
}

DepthCondition depth_condition(const ModelParams& params) {
    params.validate();
    const double c1 = params.c1, c2 = params.c2, c3 = params.c3, d = params.d;
    const double B = 2.0 * (c2 + c3) * (c2 + c3) / c1 + d * (d * c1 + 4.0 * c2 + 4.0 * c3) / 2.0;
    const double s2 = std::sqrt(2.0);
    DepthCondition out;
    out.lhs = s2 / 24.0 * std::pow(c1, 2.5) * std::pow(B, 1.5) +
              s2 / 20.0 * std::pow(c1, 1.5) * std::pow(B, 2.5);
    out.rhs = std::pow(c2 + c3, 4);
    out.holds = out.lhs < out.rhs;
    return out;
}

XiStarReport find_xi_star(const ModelParams& params, double xi_lo, double xi_hi, int n_scan,
                          int n_grid) {
    params.validate();
    if (!(xi_hi > xi_lo)) throw config_error("empty xi range");
    if (!(xi_lo >= params.epsilon0)) throw config_error("xi range must start at or above epsilon0");
    if (!(xi_lo / 2.0 > params.c3))
        throw config_error("xi range must satisfy xi > 2 c3 for a finite boundary coefficient");
    if (n_scan < 8) throw config_error("scan too coarse");

    XiStarReport rep;
    rep.depth = depth_condition(params);
    rep.depth_warning = !rep.depth.holds;
    rep.bracket_lo = xi_lo;
    rep.bracket_hi = xi_hi;

    auto mu_of = [&](double xi) {
        return mu_matrix(SLProblem::build(xi, 1, n_grid, params), true).mu;
    };

    rep.scan.reserve(n_scan);
    for (int i = 0; i < n_scan; ++i) {
        const double xi = xi_lo + (xi_hi - xi_lo) * static_cast<double>(i) / (n_scan - 1);
        rep.scan.emplace_back(xi, mu_of(xi));
    }

    double first_root = 0.0;
    for (int i = 0; i + 1 < n_scan; ++i) {
        const double g0 = rep.scan[i].second + 1.0;
        const double g1 = rep.scan[i + 1].second + 1.0;
        if (g0 == 0.0) {
            ++rep.n_roots;
            if (rep.n_roots == 1) first_root = rep.scan[i].first;
            continue;
        }
        if (g0 * g1 < 0.0) {
            double lo = rep.scan[i].first, hi = rep.scan[i + 1].first;
            double glo = g0;
            double root = 0.5 * (lo + hi);
            for (int it = 0; it < 200; ++it) {
                root = 0.5 * (lo + hi);
                const double gm = mu_of(root) + 1.0;
                if (std::abs(gm) <= 1e-10) break;
                if (glo * gm < 0.0)
                    hi = root;
                else {
                    lo = root;
                    glo = gm;
                }
                if (hi - lo <= 1e-16 * std::max(1.0, std::abs(root))) break;
            }
            ++rep.n_roots;
            if (rep.n_roots == 1) first_root = root;
        }
    }
    if (rep.n_roots == 0)
        throw numerical_error("no crossing of mu = -1 in the scanned range");

    rep.xi_star = first_root;
    rep.mu_at_root = mu_of(rep.xi_star);
    const double dxi = 1e-6 * std::max(1.0, std::abs(rep.xi_star));
    rep.slope = (mu_of(rep.xi_star + dxi) - mu_of(rep.xi_star - dxi)) / (2.0 * dxi);
    rep.monotone_through_crossing = rep.slope > 0.0;
    return rep;
}

std::vector<std::vector<double>> cosine_decompose(const std::vector<std::vector<double>>& g,
                                                  int kmax, double tol) {
    if (g.size() < 5) throw config_error("cosine_decompose: too few columns");
    const int nw = static_cast<int>(g.size()) - 1;  // columns 0..nw, first/last identified
    const std::size_t rows = g[0].size();
    for (const auto& col : g)
        if (col.size() != rows) throw config_error("cosine_decompose: ragged grid");
    if (kmax < 0 || kmax > nw / 2) throw config_error("cosine_decompose: kmax out of range");

    // evenness: g(-w) == g(w) means column i pairs with column nw-i
    double scale = 0.0, odd = 0.0;
    for (int i = 0; i <= nw; ++i)
        for (std::size_t j = 0; j < rows; ++j) scale = std::max(scale, std::abs(g[i][j]));
    for (int i = 1; i < nw; ++i)
        for (std::size_t j = 0; j < rows; ++j)
            odd = std::max(odd, 0.5 * std::abs(g[i][j] - g[nw - i][j]));
    if (odd > tol * std::max(1.0, scale))
        throw config_error("cosine_decompose: input is not even in w");

    std::vector<std::vector<double>> mk(kmax + 1, std::vector<double>(rows, 0.0));
    for (int k = 0; k <= kmax; ++k) {
        const double factor = (k == 0) ? 1.0 / nw : 2.0 / nw;
        for (std::size_t j = 0; j < rows; ++j) {
            double s = 0.0;
            for (int i = 0; i < nw; ++i) {
                const double w = -kPi + 2.0 * kPi * i / nw;
                s += g[i][j] * std::cos(k * w);
            }
            mk[k][j] = factor * s;
        }
    }
    return mk;
}

KernelReport kernel_report(double xi_star, int kmax, const ModelParams& params, int n_grid) {
    if (kmax < 1) throw config_error("kernel_report needs kmax >= 1");
    KernelReport rep;
    rep.xi_star = xi_star;
    const SLProblem p = SLProblem::build(xi_star, 1, n_grid, params);
    rep.mu = mu_matrix(p, true).mu;

    double integ = 0.0;
    const double h = p.z0 / p.n;
    for (int i = 0; i <= p.n; ++i) {
        const double w = (i == 0 || i == p.n) ? 0.5 * h : h;
        integ += w / (p.a[i] * p.a[i] * p.a[i]);
    }
    rep.integral_a_minus3 = integ;

    for (int k = 0; k <= kmax; ++k) {
        KernelModeEntry e;
        e.k = k;
        if (k == 0) {
            // m0 = A0 int a^-3; a positive integrand forces A0 = 0
            e.detail = integ;
            e.admits_nontrivial = (integ == 0.0);
        } else {
            e.detail = rep.mu + static_cast<double>(k) * k;
            e.admits_nontrivial = std::abs(e.detail) <= 1e-6;
        }
        rep.modes.push_back(e);
        if (e.admits_nontrivial) ++rep.dimension;
    }
    return rep;
}

namespace {

struct TEval {
    double T = 0.0, area = 0.0, bdry = 0.0, norm2 = 0.0;
};

TEval evaluate_transversality(double xi, const ModelParams& params, int n) {
    const SLProblem p = SLProblem::build(xi, 1, n, params);
    const EigenResult er = mu_matrix(p, false);
    const double h = p.z0 / n;

    std::vector<double> Mz(n + 1);
    Mz[0] = (-3 * er.M[0] + 4 * er.M[1] - er.M[2]) / (2 * h);
    for (int i = 1; i < n; ++i) Mz[i] = (er.M[i + 1] - er.M[i - 1]) / (2 * h);
    Mz[n] = p.beta * er.M[n];  // converged Robin value at the top

    double area = 0.0, norm2 = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 * h : h;
        const double a = p.a[i];
        const double az = -params.c1 / a;
        area += w * (-er.M[i] * er.M[i] / a + 3.0 * az * er.M[i] * Mz[i]);
        norm2 += w * er.M[i] * er.M[i];
    }
    TEval out;
    out.area = 2.0 * kPi * xi * area;
    out.bdry = kPi * (2.0 * params.c2 * er.M[n] * er.M[n] + xi * xi * er.M[n] * Mz[n]);
    out.T = out.area + out.bdry;
    out.norm2 = kPi * norm2;
    return out;
}

}  // namespace

TransversalityResult transversality(double xi_star, const ModelParams& params, int n) {
    if (n < 64 || n % 2 != 0) throw config_error("transversality needs even n >= 64");
    const TEval fine = evaluate_transversality(xi_star, params, n);
    const TEval coarse = evaluate_transversality(xi_star, params, n / 2);
    TransversalityResult r;
    r.T_raw = fine.T;
    r.T = fine.T + (fine.T - coarse.T) / 3.0;
    r.area_term = fine.area;
    r.boundary_term = fine.bdry;
    r.zeta_norm2 = fine.norm2;
    const double c2 = params.c2, c3 = params.c3;
    r.lower_bound_expr =
        (2.0 * c2 + (std::sqrt(3.0) - c2 / (xi_star / 2.0 - c3)) * xi_star) * kPi;
    return r;
}

}  // namespace vesselwave
