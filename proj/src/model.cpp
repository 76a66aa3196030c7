#include "vesselwave/model.hpp"

#include <algorithm>
#include <cmath>

namespace vesselwave {

void ModelParams::validate() const {
    if (!(d > 0.0)) throw config_error("d must be positive");
    if (!(c1 > 0.0)) throw config_error("c1 must be positive");
    if (!(rho > 0.0)) throw config_error("rho must be positive");
    if (!(c > 0.0)) throw config_error("c must be positive");
    if (!(c2 >= 0.0) || !(c3 >= 0.0)) throw config_error("c2, c3 must be nonnegative");
    if (!(epsilon0 > 0.0 && epsilon0 < 1.0)) throw config_error("epsilon0 must lie in (0,1)");
    if (!(tol > 0.0)) throw config_error("tolerance must be positive");
    if (mode == ForceMode::Physical) {
        const double r2 = std::abs(c2 - c1) / std::max(1.0, c1);
        const double r3 = std::abs(c3 - c1 * d) / std::max(1.0, c1 * d);
        if (r2 > 1e-12 || r3 > 1e-12)
            throw config_error("physical mode requires c2 = c1 and c3 = c1*d");
    }
}

ModelParams ModelParams::reference() {
    ModelParams p;
    p.d = 0.1;
    p.c1 = 1.0;
    p.rho = 1.0;
    p.c = 1.0;
    p.c2 = 1.0;
    p.c3 = 0.1;
    return p;
}

BodyForceModel BodyForceModel::constant_vertical(double c1) {
    if (!(c1 > 0.0)) throw config_error("constant vertical force requires c1 > 0");
    BodyForceModel m;
    m.kind_ = ForceKind::ConstantVertical;
    m.c1_ = c1;
    return m;
}

BodyForceModel BodyForceModel::tabulated(ForceTable table) {
    const std::size_t nx = table.x.size(), ny = table.y.size();
    if (nx < 2 || ny < 2) throw config_error("tabulated force needs at least a 2x2 grid");
    if (table.f1.size() != nx * ny || table.f2.size() != nx * ny)
        throw config_error("tabulated force grid is not rectangular");
    for (std::size_t i = 1; i < nx; ++i)
        if (!(table.x[i] > table.x[i - 1])) throw config_error("tabulated x axis not increasing");
    for (std::size_t j = 1; j < ny; ++j)
        if (!(table.y[j] > table.y[j - 1])) throw config_error("tabulated y axis not increasing");
    BodyForceModel m;
    m.kind_ = ForceKind::Tabulated;
    m.table_ = std::move(table);
    m.build_cumulative();
    return m;
}

const ForceTable& BodyForceModel::table() const {
    if (kind_ != ForceKind::Tabulated) throw config_error("model has no table");
    return table_;
}

void BodyForceModel::build_cumulative() {
    const std::size_t nx = table_.x.size(), ny = table_.y.size();
    f2_cumulative_.assign(nx * ny, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 1; j < ny; ++j) {
            const double dy = table_.y[j] - table_.y[j - 1];
            f2_cumulative_[i * ny + j] =
                f2_cumulative_[i * ny + j - 1] +
                0.5 * dy * (table_.f2[i * ny + j] + table_.f2[i * ny + j - 1]);
        }
    }
}

double BodyForceModel::interpolate(const std::vector<double>& field, double x, double y) const {
    const auto& xs = table_.x;
    const auto& ys = table_.y;
    const std::size_t ny = ys.size();
    auto clamp_cell = [](const std::vector<double>& ax, double v) {
        auto it = std::upper_bound(ax.begin(), ax.end(), v);
        std::ptrdiff_t i = std::distance(ax.begin(), it) - 1;
        i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(ax.size()) - 2);
        return static_cast<std::size_t>(i);
    };
    const std::size_t i = clamp_cell(xs, x), j = clamp_cell(ys, y);
    const double tx = (x - xs[i]) / (xs[i + 1] - xs[i]);
    const double ty = (y - ys[j]) / (ys[j + 1] - ys[j]);
    const double f00 = field[i * ny + j], f01 = field[i * ny + j + 1];
    const double f10 = field[(i + 1) * ny + j], f11 = field[(i + 1) * ny + j + 1];
    return (1 - tx) * ((1 - ty) * f00 + ty * f01) + tx * ((1 - ty) * f10 + ty * f11);
}

double BodyForceModel::f1(double x, double y) const {
    if (kind_ == ForceKind::ConstantVertical) return 0.0;
    return interpolate(table_.f1, x, y);
}

double BodyForceModel::f2(double x, double y) const {
    if (kind_ == ForceKind::ConstantVertical) return c1_;
    return interpolate(table_.f2, x, y);
}

double BodyForceModel::potential(double x, double y, double d) const {
    if (kind_ == ForceKind::ConstantVertical) return c1_ * (y + d);
    // cumulative trapezoid of f2 from the table base, shifted so F(x,-d)=0
    const double base = interpolate(f2_cumulative_, x, -d);
    return interpolate(f2_cumulative_, x, y) - base;
}

bool ValidationReport::pass() const {
    for (const auto& ch : checks)
        if (!ch.pass) return false;
    return true;
}

const CheckResult& ValidationReport::check(const std::string& name) const {
    for (const auto& ch : checks)
        if (ch.name == name) return ch;
    throw std::out_of_range("no such check: " + name);
}

namespace {

// Sampling resolution for validation sweeps over [-pi,pi] x [-d, 0].
constexpr int kNx = 65;
constexpr int kNy = 65;

}  // namespace

ValidationReport validate_body_force(const BodyForceModel& model, const ModelParams& params) {
    params.validate();
    const double pi = 3.14159265358979323846;
    const double d = params.d;
    const double hx = 2 * pi / (kNx - 1);
    const double hy = d / (kNy - 1);
    auto xat = [&](int i) { return -pi + i * hx; };
    auto yat = [&](int j) { return -d + j * hy; };

    ValidationReport report;
    const double tol_abs = params.tol * std::max(1.0, params.c1);

    // (1) irrotationality: df1/dy + df2/dx = 0, central differences on the interior
    double r_irr = 0.0;
    for (int i = 1; i + 1 < kNx; ++i)
        for (int j = 1; j + 1 < kNy; ++j) {
            const double f1y = (model.f1(xat(i), yat(j + 1)) - model.f1(xat(i), yat(j - 1))) / (2 * hy);
            const double f2x = (model.f2(xat(i + 1), yat(j)) - model.f2(xat(i - 1), yat(j))) / (2 * hx);
            r_irr = std::max(r_irr, std::abs(f1y + f2x));
        }
    report.checks.push_back({"irrotational", r_irr, tol_abs, r_irr <= tol_abs});

    // (2) f1 vanishes on the bottom boundary
    double r_bnd = 0.0;
    for (int i = 0; i < kNx; ++i) r_bnd = std::max(r_bnd, std::abs(model.f1(xat(i), -d)));
    report.checks.push_back({"f1-boundary-vanishing", r_bnd, tol_abs, r_bnd <= tol_abs});

    // (3) zero vertical integral of f1 (to the mean surface level)
    double r_int = 0.0;
    for (int i = 0; i < kNx; ++i) {
        double s = 0.0;
        for (int j = 1; j < kNy; ++j)
            s += 0.5 * hy * (model.f1(xat(i), yat(j)) + model.f1(xat(i), yat(j - 1)));
        r_int = std::max(r_int, std::abs(s));
    }
    report.checks.push_back({"f1-zero-vertical-integral", r_int, tol_abs, r_int <= tol_abs});

    // (4) int_{-d}^{y} df1/dx dr - f2 is the constant -c1
    double zmin = 0.0, zmax = 0.0;
    bool first = true;
    for (int i = 1; i + 1 < kNx; ++i) {
        double acc = 0.0;
        auto df1dx = [&](int ii, double y) {
            return (model.f1(xat(ii + 1), y) - model.f1(xat(ii - 1), y)) / (2 * hx);
        };
        for (int j = 0; j < kNy; ++j) {
            if (j > 0) acc += 0.5 * hy * (df1dx(i, yat(j)) + df1dx(i, yat(j - 1)));
            const double v = acc - model.f2(xat(i), yat(j));
            if (first || v < zmin) zmin = v;
            if (first || v > zmax) zmax = v;
            first = false;
        }
    }
    const double r_const = zmax - zmin;
    const double r_value = std::abs(0.5 * (zmax + zmin) + params.c1);
    report.checks.push_back({"laplacian-constant", r_const, tol_abs, r_const <= tol_abs});
    report.checks.push_back({"laplacian-equals-minus-c1", r_value, tol_abs, r_value <= tol_abs});

    // (5) nonnegativity of f1, f2
    double r_neg = 0.0;
    for (int i = 0; i < kNx; ++i)
        for (int j = 0; j < kNy; ++j) {
            r_neg = std::max(r_neg, -model.f1(xat(i), yat(j)));
            r_neg = std::max(r_neg, -model.f2(xat(i), yat(j)));
        }
    report.checks.push_back({"nonnegativity", r_neg, tol_abs, r_neg <= tol_abs});

    return report;
}

std::pair<double, double> derive_constants(const BodyForceModel& model, const ModelParams& params) {
    params.validate();
    const double pi = 3.14159265358979323846;
    const double d = params.d;
    const double tol_rel = params.tol;

    double c2_min = 0, c2_max = 0, c3_min = 0, c3_max = 0;
    for (int i = 0; i < kNx; ++i) {
        const double x = -pi + i * (2 * pi / (kNx - 1));
        const double v2 = model.f2(x, 0.0);
        const double v3 = model.potential(x, 0.0, d);
        if (i == 0) {
            c2_min = c2_max = v2;
            c3_min = c3_max = v3;
        } else {
            c2_min = std::min(c2_min, v2);
            c2_max = std::max(c2_max, v2);
            c3_min = std::min(c3_min, v3);
            c3_max = std::max(c3_max, v3);
        }
    }
    const double c2 = 0.5 * (c2_min + c2_max);
    const double c3 = 0.5 * (c3_min + c3_max);
    if (c2_max - c2_min > tol_rel * std::max(1.0, std::abs(c2)))
        throw config_error("x-dependent boundary constant f2(x,0)");
    if (c3_max - c3_min > tol_rel * std::max(1.0, std::abs(c3)))
        throw config_error("x-dependent integrated constant int f2");
    return {c2, c3};
}

}  // namespace vesselwave
