/// @file model.hpp
/// @brief Physical parameters, body-force models and their structural validation.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vesselwave {

/// Configuration / precondition violations (CLI exit code 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failures: non-convergence, missing bracket, ... (CLI exit code 1).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// h_z <= 0 detected somewhere: the monotone-height assumption broke.
struct stagnation_error : numerical_error {
    using numerical_error::numerical_error;
};

enum class ForceMode { Physical, Abstract };

/// Single source of truth for every formula.
///
/// In physical mode the boundary constants are tied to the force model
/// (c2 = c1, c3 = c1*d for the constant vertical force); in abstract mode
/// c2, c3 are free nonnegative inputs so the linearized problem can be
/// exercised over the full constant ranges.
struct ModelParams {
    double d = 0.1;    ///< channel half-depth, > 0
    double c1 = 1.0;   ///< force constant in Delta z = -c1, > 0
    double rho = 1.0;  ///< density, > 0
    double c = 1.0;    ///< wave speed, > 0
    double c2 = 1.0;   ///< boundary force constant f2(.,0), >= 0
    double c3 = 0.1;   ///< integrated force constant int_{-d}^0 f2 dr, >= 0
    double epsilon0 = 0.01;  ///< lower cutoff of the xi interval, in (0,1)
    double tol = 1e-8;       ///< relative tolerance for validation checks
    ForceMode mode = ForceMode::Physical;

    /// Throws config_error if any invariant fails.
    void validate() const;

    /// Reference configuration used throughout the tests.
    static ModelParams reference();
};

enum class ForceKind { ConstantVertical, Tabulated };

/// Sampled (f1, f2) on a rectangular grid with monotone axes.
struct ForceTable {
    std::vector<double> x;   ///< nx samples
    std::vector<double> y;   ///< ny samples
    std::vector<double> f1;  ///< nx*ny, index ix*ny + iy
    std::vector<double> f2;  ///< nx*ny, index ix*ny + iy
};

/// Body force (f1, f2) with its potential F (F_x = -f1, F_y = f2, F(.,-d) = 0).
class BodyForceModel {
  public:
    static BodyForceModel constant_vertical(double c1);
    static BodyForceModel tabulated(ForceTable table);

    ForceKind kind() const { return kind_; }
    double f1(double x, double y) const;
    double f2(double x, double y) const;

    /// Potential normalized to vanish on the channel bottom y = -d.
    /// ConstantVertical: F(x,y) = c1*(y+d) exactly.
    double potential(double x, double y, double d) const;

    /// Surface offset F(.,0) = int_{-d}^0 f2 dr (x-independent for valid models).
    double surface_offset(double d) const { return potential(0.0, 0.0, d); }

    const ForceTable& table() const;

  private:
    BodyForceModel() = default;
    ForceKind kind_ = ForceKind::ConstantVertical;
    double c1_ = 1.0;
    ForceTable table_;
    std::vector<double> f2_cumulative_;  // per x-column cumulative trapezoid of f2 in y
    void build_cumulative();
    double interpolate(const std::vector<double>& field, double x, double y) const;
};

struct CheckResult {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool pass() const;
    const CheckResult& check(const std::string& name) const;
};

/// Checks the structural assumptions on (f1, f2): irrotationality,
/// boundary-vanishing f1, zero vertical integral of f1, constancy of
/// int df1/dx - f2 (= -c1), and nonnegativity. Failures are reported, not thrown.
ValidationReport validate_body_force(const BodyForceModel& model, const ModelParams& params);

/// c2 = f2(x,0), c3 = int_{-d}^0 f2(x,r) dr, both checked x-independent.
/// Throws config_error if either constant varies with x beyond tolerance.
std::pair<double, double> derive_constants(const BodyForceModel& model, const ModelParams& params);

}  // namespace vesselwave
