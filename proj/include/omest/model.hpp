#pragma once

#include "omest/gaussian.hpp"

#include <utility>
#include <vector>

namespace omest {

enum class ModelVariant { linear, quadratic };

const char* to_string(ModelVariant v);
ModelVariant variant_from_string(const std::string& s);

/// All model constants. Rates and couplings are angular frequencies in 1/s;
/// every "Hz" value from the literature presets is used directly as 1/s.
struct PhysicalParams {
    double omega_m = 0.0;       // mechanical frequency, 1/s
    double mass = 0.0;          // effective mass, kg
    double Gamma_m = 0.0;       // mechanical damping, 1/s
    double Delta_0 = 0.0;       // bare detuning omega_0 - omega_L, 1/s
    double kappa = 0.0;         // cavity decay, 1/s
    double g1 = 0.0;            // linear coupling, 1/s, >= 0
    double g2 = 0.0;            // quadratic coupling, 1/s
    double drive = 0.0;         // drive amplitude E, 1/s
    double temperature = 0.0;   // bath temperature, K
    ModelVariant variant = ModelVariant::quadratic;

    /// The linear variant forces g2 = 0 in every formula.
    double g2_eff() const { return variant == ModelVariant::linear ? 0.0 : g2; }

    void validate() const;  // throws ConfigError
};

/// Semi-classical operating point: displaced first moments and the effective
/// quantities of the bilinear Hamiltonian.
struct SteadyOperatingPoint {
    Eigen::Vector4d R0;        // (Q0, P0, x0, p0)
    double Delta_eff = 0.0;    // Delta_0 - sqrt(2) g1 x0 + g2 x0^2
    double omega_eff = 0.0;    // omega_m + 2 g2 |alpha|^2
    double g_eff = 0.0;        // -sqrt(2) g1 + 2 g2 x0
    double photon_number = 0.0;  // |alpha|^2 = (Q0^2 + P0^2)/2
    double n_bar = 0.0;        // mechanical thermal occupancy

    double x0() const { return R0(2); }
};

struct OperatingPointOptions {
    /// Under multistability, pick the stable root with the smallest |x0|
    /// instead of raising MultistableError.
    bool select_smallest_x0 = false;
};

/// Bose-Einstein occupancy 1/(exp(hbar w / kB T) - 1); exactly 0 at T = 0.
double thermal_occupation(double omega_m, double temperature);

/// Fabry-Perot couplings (g1, g2) = (w0 xzp / L, 2 w0 xzp^2 / L^2) with
/// xzp = sqrt(hbar / 2 m w_m).
std::pair<double, double> fabry_perot_couplings(double omega_0, double length, double mass,
                                                double omega_m);

/// Real roots x0 of the cleared-denominator steady-state equation, polished
/// by Newton iteration and deduplicated. Degree <= 5 (quadratic variant),
/// <= 3 (linear variant).
std::vector<double> operating_point_roots(const PhysicalParams& params);

/// Reconstructs the full operating point from a given mechanical displacement.
SteadyOperatingPoint operating_point_from_x0(const PhysicalParams& params, double x0);

/// Solves the semi-classical fixed point; requires a unique stable and
/// physical root unless opts.select_smallest_x0 is set.
SteadyOperatingPoint solve_operating_point(const PhysicalParams& params,
                                           OperatingPointOptions opts = {});

/// Bilinear Hamiltonian matrix divided by hbar, quadrature order (Q,P,Xb,Pb).
Eigen::Matrix4d build_hamiltonian_matrix(const PhysicalParams& params,
                                         const SteadyOperatingPoint& op);

/// The 4x4 complex damping matrix of the Lindblad dissipator.
DampingMatrix build_damping_matrix(const PhysicalParams& params);

struct SteadyState {
    SteadyOperatingPoint op;
    MomentState state;  // first_moments = R0, covariance = steady sigma
    /// Advisory: |alpha|^2 < 50 puts the Gaussian approximation in doubt.
    bool gaussianity_warning = false;
};

SteadyState steady_state(const PhysicalParams& params, OperatingPointOptions opts = {});

}  // namespace omest
