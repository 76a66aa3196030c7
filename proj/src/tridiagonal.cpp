#include "vesselwave/tridiagonal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vesselwave {

namespace {

// Extended-precision Sturm count: the smallest eigenvalue sits many orders
// below the stiffness scale a^2/h^2, so a double-precision recurrence smears
// its location by ~eps*||C|| (1e-8 at n=1024). long double keeps the
// transition sharp to ~1e-12 absolute.
int sturm_count_ld(const std::vector<double>& diag, const std::vector<double>& off,
                   long double lambda) {
    const std::size_t n = diag.size();
    int count = 0;
    long double q = 1.0L;
    const long double tiny =
        std::numeric_limits<long double>::min() / std::numeric_limits<long double>::epsilon();
    for (std::size_t i = 0; i < n; ++i) {
        const long double e2 =
            (i == 0) ? 0.0L : static_cast<long double>(off[i - 1]) * off[i - 1];
        q = static_cast<long double>(diag[i]) - lambda - (i == 0 ? 0.0L : e2 / q);
        if (q == 0.0L) q = -tiny;  // nudge off exact zero, standard safeguard
        if (q < 0.0L) ++count;
    }
    return count;
}

}  // namespace

int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double lambda) {
    return sturm_count_ld(diag, off, lambda);
}

double smallest_eigenvalue(const std::vector<double>& diag, const std::vector<double>& off) {
    const std::size_t n = diag.size();
    if (n == 0) throw std::invalid_argument("empty matrix");
    // Gershgorin bracket
    long double lo = diag[0], hi = diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(off[i - 1]);
        if (i + 1 < n) r += std::abs(off[i]);
        lo = std::min(lo, static_cast<long double>(diag[i] - r));
        hi = std::max(hi, static_cast<long double>(diag[i] + r));
    }
    const long double eps_ld = std::numeric_limits<long double>::epsilon();
    const long double scale = std::max(std::abs(static_cast<double>(lo)),
                                       std::abs(static_cast<double>(hi)));
    for (int it = 0; it < 400; ++it) {
        const long double mid = 0.5L * (lo + hi);
        if (sturm_count_ld(diag, off, mid) >= 1)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 8.0L * eps_ld * std::max(scale, std::abs(mid))) break;
    }
    return static_cast<double>(0.5L * (lo + hi));
}

std::vector<double> shifted_tridiagonal_solve(const std::vector<double>& diag,
                                              const std::vector<double>& off, double shift,
                                              const std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    // working bands: sub (a), main (b), sup (c), extra sup (d) for pivoting fill-in
    std::vector<double> a(n, 0.0), b(n), cc(n, 0.0), dd(n, 0.0), x = rhs;
    for (std::size_t i = 0; i < n; ++i) {
        b[i] = diag[i] - shift;
        if (i + 1 < n) {
            cc[i] = off[i];
            a[i + 1] = off[i];
        }
    }
    const double tiny = 1e-300;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (std::abs(a[k + 1]) > std::abs(b[k])) {  // swap rows k, k+1
            std::swap(b[k], a[k + 1]);
            std::swap(cc[k], b[k + 1]);
            std::swap(dd[k], cc[k + 1]);
            std::swap(x[k], x[k + 1]);
        }
        if (b[k] == 0.0) b[k] = tiny;
        const double m = a[k + 1] / b[k];
        b[k + 1] -= m * cc[k];
        cc[k + 1] -= m * dd[k];
        x[k + 1] -= m * x[k];
        a[k + 1] = 0.0;
    }
    if (b[n - 1] == 0.0) b[n - 1] = tiny;
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        if (ii + 1 < n) s -= cc[ii] * x[ii + 1];
        if (ii + 2 < n) s -= dd[ii] * x[ii + 2];
        x[ii] = s / b[ii];
    }
    return x;
}

std::vector<double> inverse_iteration(const std::vector<double>& diag,
                                      const std::vector<double>& off, double lambda,
                                      std::vector<double> seed) {
    const std::size_t n = diag.size();
    std::vector<double> v = std::move(seed);
    if (v.size() != n) {
        v.assign(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i % 7);
    }
    double nrm = 0.0;
    for (double t : v) nrm += t * t;
    nrm = std::sqrt(nrm);
    for (auto& t : v) t /= nrm;

    for (int it = 0; it < 4; ++it) {
        v = shifted_tridiagonal_solve(diag, off, lambda, v);
        nrm = 0.0;
        for (double t : v) nrm += t * t;
        nrm = std::sqrt(nrm);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) throw std::runtime_error("inverse iteration broke down");
        for (auto& t : v) t /= nrm;
    }
    return v;
}

}  // namespace vesselwave
