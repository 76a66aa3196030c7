#include "vesselwave/laminar.hpp"

#include <cmath>

namespace vesselwave {

double z0_of_xi(double xi, const ModelParams& params) {
    if (!(xi > 0.0)) throw config_error("xi must be positive");
    return params.d * (params.d * params.c1 + 2.0 * xi) / 2.0;
}

double coefficient_a(double z, double xi, const ModelParams& params) {
    const double z0 = z0_of_xi(xi, params);
    if (z < -1e-14 || z > z0 * (1.0 + 1e-14))
        throw config_error("z outside [0, z0]");
    return std::sqrt(xi * xi + 2.0 * params.c1 * (z0 - z));
}

double coefficient_a_z(double z, double xi, const ModelParams& params) {
    return -params.c1 / coefficient_a(z, xi, params);
}

double coefficient_a_xi_fixed_z0(double z, double xi, const ModelParams& params) {
    return xi / coefficient_a(z, xi, params);
}

double coefficient_a_xi_family(double z, double xi, const ModelParams& params) {
    return (xi + params.c1 * params.d) / coefficient_a(z, xi, params);
}

double laminar_height(double z, double xi, const ModelParams& params) {
    return -coefficient_a(z, xi, params) / params.c1 + params.d + xi / params.c1;
}

LaminarProfile laminar_profile(double xi, int n, const ModelParams& params) {
    params.validate();
    if (!(xi > 0.0)) throw config_error("xi must be positive");
    if (n < 8) throw config_error("laminar profile needs n >= 8");
    LaminarProfile p;
    p.xi = xi;
    p.z0 = z0_of_xi(xi, params);
    p.Q = xi;
    p.z.resize(n + 1);
    p.H.resize(n + 1);
    p.Hz.resize(n + 1);
    p.a.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double z = p.z0 * static_cast<double>(i) / n;
        p.z[i] = z;
        p.a[i] = coefficient_a(z, xi, params);
        p.H[i] = laminar_height(z, xi, params);
        p.Hz[i] = 1.0 / p.a[i];
    }
    return p;
}

LaminarOdeCheck verify_laminar_ode(const LaminarProfile& profile, const ModelParams& params) {
    const double c1 = params.c1;
    const int n = static_cast<int>(profile.z.size()) - 1;
    const double h = profile.z0 / n;

    // RK4 on (H, H_z)' = (H_z, c1 H_z^3) from H(0)=0, H_z(0)=1/a(0).
    double H = 0.0;
    double v = 1.0 / profile.a[0];
    double max_err = 0.0;
    auto f = [c1](double vz) { return c1 * vz * vz * vz; };
    for (int i = 0; i < n; ++i) {
        const double k1H = v, k1v = f(v);
        const double k2H = v + 0.5 * h * k1v, k2v = f(v + 0.5 * h * k1v);
        const double k3H = v + 0.5 * h * k2v, k3v = f(v + 0.5 * h * k2v);
        const double k4H = v + h * k3v, k4v = f(v + h * k3v);
        H += h / 6.0 * (k1H + 2 * k2H + 2 * k3H + k4H);
        v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        max_err = std::max(max_err, std::abs(H - profile.H[i + 1]));
    }

    // Surface relation with the potential referenced to the mean surface level,
    // the convention under which Q = xi closes the laminar system.
    const double surface_height = profile.H[n] - params.d;  // = 0 for a valid profile
    const double F_surf = params.c1 * surface_height;       // F1(y) - F1(0) for the constant model
    const double rel = 1.0 - (profile.Q - 2.0 * F_surf) * profile.Hz[n];

    return {max_err, std::abs(rel)};
}

}  // namespace vesselwave
