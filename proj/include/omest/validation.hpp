#pragma once

#include "omest/estimation.hpp"
#include "omest/sweep.hpp"

#include <optional>
#include <string>
#include <vector>

namespace omest {

struct CheckResult {
    std::string name;
    bool passed = false;
    int checks = 0;
    int failures = 0;
    double worst = 0.0;  // worst observed metric (meaning depends on suite)
    std::string detail;
};

/// Runs every cross-module invariant suite at the given tolerances.
std::vector<CheckResult> run_validation(const Tolerances& tol);

/// Central finite differences of the full steady-state pipeline with step
/// h_i = step_scale * max(|g_i|, Gamma_m). The linear variant is differenced
/// within the quadratic family evaluated at g2 = 0, matching the analytic
/// gradients' definition.
struct FdGradients {
    std::array<double, 2> dx0{}, dDelta_eff{}, dAlpha2{}, dOmega_eff{}, dG_eff{};
    std::array<Eigen::Vector4d, 2> dR0{};
    std::array<Eigen::Matrix4d, 2> dSigma{};
    std::array<double, 2> step{};  // the steps actually used
};

FdGradients finite_difference_gradients(const PhysicalParams& params,
                                        double step_scale = 1e-6);

/// Roundoff floor of a central difference: differencing a quantity of
/// magnitude |base| over step h cannot certify derivative differences below
/// this. Comparisons against FD oracles should allow tol*scale + floor.
double fd_noise_floor(double base, double h);

/// Interpolated abscissa where curves a and b cross (sign change of a - b),
/// in the x units given. Returns nullopt if they never cross.
std::optional<double> find_crossover(const std::vector<double>& x,
                                     const std::vector<double>& a,
                                     const std::vector<double>& b);

}  // namespace omest
