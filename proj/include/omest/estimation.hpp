#pragma once

#include "omest/gaussian.hpp"
#include "omest/model.hpp"

#include <array>
#include <optional>

namespace omest {

/// Derivatives of the operating point with respect to (g1, g2), obtained by
/// implicit differentiation of the semi-classical fixed point. Index 0 is g1.
struct OperatingPointGradients {
    std::array<double, 2> dx0{};
    std::array<double, 2> dDelta_eff{};
    std::array<double, 2> dQ0{};
    std::array<double, 2> dP0{};
    std::array<double, 2> dp0{};
    std::array<double, 2> dAlpha2{};
    std::array<double, 2> dOmega_eff{};
    std::array<double, 2> dG_eff{};
    std::array<Eigen::Vector4d, 2> dR0{};
};

OperatingPointGradients operating_point_gradients(const PhysicalParams& params,
                                                  const SteadyOperatingPoint& op);

/// Derivatives of the steady covariance, from differentiating the Lyapunov
/// equation: B^T dS + dS B = -(dB^T sigma + sigma dB). The diffusion matrix
/// carries no coupling dependence.
std::array<Eigen::Matrix4d, 2> covariance_gradients(const PhysicalParams& params,
                                                    const SteadyOperatingPoint& op,
                                                    const Eigen::Matrix4d& sigma_bar,
                                                    const OperatingPointGradients& grads);

/// Quantum Fisher information matrix for (g1, g2) with its decomposition
/// into the first-moment and covariance contributions.
struct QfimResult {
    Eigen::Matrix2d I;               // s^2
    Eigen::Matrix2d averages_term;   // s^2
    Eigen::Matrix2d variances_term;  // s^2
    Eigen::Matrix2d I_dimensionless;  // omega_m^2 * I
};

/// Dimension-generic QFIM over an N-mode Gaussian family. dR0/dSigma hold the
/// parameter derivatives of the moments; omega_m sets the dimensionless
/// rescaling. Throws NonPhysicalStateError if sigma_bar is not a state.
QfimResult qfim(const std::array<Vec, 2>& dR0, const Mat& sigma_bar,
                const std::array<Mat, 2>& dSigma, double omega_m,
                double physical_tol = 1e-9);

enum class QuadratureIndex { Q = 0, P = 1, Xb = 2, Pb = 3 };

const char* to_string(QuadratureIndex q);

/// Classical Fisher information of a single-quadrature (homodyne-style)
/// measurement with Gaussian outcome statistics.
Eigen::Matrix2d quadrature_fi(QuadratureIndex k, const SteadyOperatingPoint& op,
                              const Eigen::Matrix4d& sigma_bar,
                              const OperatingPointGradients& grads,
                              const std::array<Eigen::Matrix4d, 2>& dSigma);

struct LocalQfims {
    QfimResult global;
    QfimResult light;
    QfimResult mechanics;
};

/// Global QFIM plus the QFIMs of the reduced light-only and mechanics-only
/// states at the steady state of params.
LocalQfims local_qfim(const PhysicalParams& params, OperatingPointOptions opts = {});

struct ErrorBounds {
    std::array<double, 2> relative{};  // Delta g_i / g_i for M runs
    std::optional<Eigen::Matrix2d> covariance_bound;  // I^{-1}/M when invertible
};

ErrorBounds error_bounds(const Eigen::Matrix2d& info, double g1, double g2, int runs = 1);

/// Everything about one operating point: QFIMs, quadrature FIs and the
/// derived Cramer-Rao relative errors.
struct EstimationReport {
    SteadyOperatingPoint op;
    bool gaussianity_warning = false;
    Eigen::Matrix4d sigma_bar;
    OperatingPointGradients gradients;
    std::array<Eigen::Matrix4d, 2> dSigma;
    QfimResult global;
    QfimResult light;
    QfimResult mechanics;
    std::array<Eigen::Matrix2d, 4> quadrature_J;  // indexed by QuadratureIndex
    ErrorBounds bound_global;
    ErrorBounds bound_light;
    ErrorBounds bound_mechanics;
    std::array<ErrorBounds, 4> bound_quadrature;
    int runs = 1;
};

EstimationReport estimate(const PhysicalParams& params, int runs = 1,
                          OperatingPointOptions opts = {});

}  // namespace omest
