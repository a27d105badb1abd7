#include "omest/model.hpp"

#include "omest/constants.hpp"
#include "omest/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace omest {

const char* to_string(ModelVariant v) {
    return v == ModelVariant::linear ? "linear" : "quadratic";
}

ModelVariant variant_from_string(const std::string& s) {
    if (s == "linear") return ModelVariant::linear;
    if (s == "quadratic") return ModelVariant::quadratic;
    throw ConfigError("unknown model variant: " + s);
}

void PhysicalParams::validate() const {
    if (!(omega_m > 0)) throw ConfigError("omega_m must be > 0");
    if (!(kappa > 0)) throw ConfigError("kappa must be > 0");
    if (!(Gamma_m > 0)) throw ConfigError("Gamma_m must be > 0");
    if (!(mass > 0)) throw ConfigError("mass must be > 0");
    if (temperature < 0) throw ConfigError("temperature must be >= 0");
    if (g1 < 0) throw ConfigError("g1 must be >= 0");
    if (!std::isfinite(drive) || !std::isfinite(Delta_0) || !std::isfinite(g2))
        throw ConfigError("non-finite parameter");
}

double thermal_occupation(double omega_m, double temperature) {
    if (temperature == 0.0) return 0.0;
    const double x = constants::hbar * omega_m / (constants::k_boltzmann * temperature);
    if (x > 700.0) return 0.0;  // exp would overflow; occupancy below 1e-300
    return 1.0 / std::expm1(x);
}

std::pair<double, double> fabry_perot_couplings(double omega_0, double length, double mass,
                                                double omega_m) {
    const double x_zp = std::sqrt(constants::hbar / (2.0 * mass * omega_m));
    return {omega_0 * x_zp / length, 2.0 * omega_0 * x_zp * x_zp / (length * length)};
}

namespace {

// Cleared-denominator form of the mechanical fixed-point equation:
//   F(x) = x [a (Delta(x)^2 + b) + 2 q w_m E^2] + c1 w_m E^2,
// with Delta(x) = Delta_0 - c1 x + q x^2, c1 = sqrt(2) g1, q the effective
// quadratic coupling, a = w_m^2 + Gamma_m^2/4, b = kappa^2/4.
struct FixedPointPoly {
    double a, b, c1, q, wm, e2, delta0;

    explicit FixedPointPoly(const PhysicalParams& p)
        : a(p.omega_m * p.omega_m + p.Gamma_m * p.Gamma_m / 4.0),
          b(p.kappa * p.kappa / 4.0),
          c1(std::sqrt(2.0) * p.g1),
          q(p.g2_eff()),
          wm(p.omega_m),
          e2(p.drive * p.drive),
          delta0(p.Delta_0) {}

    double delta(double x) const { return delta0 - c1 * x + q * x * x; }

    double value(double x) const {
        const double d = delta(x);
        return x * (a * (d * d + b) + 2.0 * q * wm * e2) + c1 * wm * e2;
    }

    double derivative(double x) const {
        const double d = delta(x);
        const double dd = -c1 + 2.0 * q * x;  // d Delta / dx
        return a * (d * d + b) + 2.0 * q * wm * e2 + x * a * 2.0 * d * dd;
    }

    // Largest term magnitude, used to make residuals relative.
    double scale(double x) const {
        const double d = delta(x);
        return std::max({std::abs(x * a * (d * d + b)), std::abs(2.0 * q * wm * e2 * x),
                         std::abs(c1 * wm * e2), 1.0});
    }

    // Coefficients in ascending degree, degree <= 5.
    std::array<double, 6> coefficients() const {
        // Delta(x)^2 coefficients
        const double d0 = delta0 * delta0;
        const double d1 = -2.0 * delta0 * c1;
        const double d2 = c1 * c1 + 2.0 * delta0 * q;
        const double d3 = -2.0 * c1 * q;
        const double d4 = q * q;
        return {c1 * wm * e2,
                a * (d0 + b) + 2.0 * q * wm * e2,
                a * d1,
                a * d2,
                a * d3,
                a * d4};
    }
};

std::vector<double> polynomial_real_roots(const std::array<double, 6>& coeff) {
    int degree = 5;
    while (degree > 0 && coeff[degree] == 0.0) --degree;
    std::vector<double> roots;
    if (degree == 0) return roots;
    if (degree == 1) {
        roots.push_back(-coeff[0] / coeff[1]);
        return roots;
    }
    Mat companion = Mat::Zero(degree, degree);
    for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -coeff[i] / coeff[degree];
    Eigen::EigenSolver<Mat> es(companion, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("operating_point_roots: eigensolver failed");
    for (int i = 0; i < degree; ++i) {
        const std::complex<double> r = es.eigenvalues()(i);
        if (std::abs(r.imag()) < 1e-8 * (1.0 + std::abs(r))) roots.push_back(r.real());
    }
    return roots;
}

}  // namespace

std::vector<double> operating_point_roots(const PhysicalParams& params) {
    params.validate();
    const FixedPointPoly poly(params);
    std::vector<double> roots = polynomial_real_roots(poly.coefficients());

    // Newton polishing on the exact residual restores full precision after
    // the companion-matrix solve.
    for (double& x : roots) {
        for (int it = 0; it < 50; ++it) {
            const double f = poly.value(x);
            const double fp = poly.derivative(x);
            if (fp == 0.0) break;
            const double step = f / fp;
            x -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
        }
    }

    // Keep only polished points that actually solve the equation.
    std::erase_if(roots, [&](double x) {
        return std::abs(poly.value(x)) > 1e-8 * poly.scale(x);
    });

    // Merge companion-matrix clusters.
    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double x : roots) {
        if (unique.empty() || std::abs(x - unique.back()) > 1e-8 * std::max(1.0, std::abs(x)))
            unique.push_back(x);
    }
    return unique;
}

SteadyOperatingPoint operating_point_from_x0(const PhysicalParams& params, double x0) {
    const double g2 = params.g2_eff();
    const double c1 = std::sqrt(2.0) * params.g1;
    const double delta_eff = params.Delta_0 - c1 * x0 + g2 * x0 * x0;
    const double denom = delta_eff * delta_eff + params.kappa * params.kappa / 4.0;
    const double e = params.drive;

    SteadyOperatingPoint op;
    const double q0 = -2.0 * delta_eff * e / (std::sqrt(2.0) * denom);
    const double p0cav = -params.kappa * e / (std::sqrt(2.0) * denom);
    const double pm = params.Gamma_m / (2.0 * params.omega_m) * x0;
    op.R0 << q0, p0cav, x0, pm;
    op.Delta_eff = delta_eff;
    op.photon_number = (q0 * q0 + p0cav * p0cav) / 2.0;
    op.omega_eff = params.omega_m + 2.0 * g2 * op.photon_number;
    op.g_eff = -c1 + 2.0 * g2 * x0;
    op.n_bar = thermal_occupation(params.omega_m, params.temperature);
    return op;
}

namespace {

bool root_is_stable_and_physical(const PhysicalParams& params, double x0) {
    const SteadyOperatingPoint op = operating_point_from_x0(params, x0);
    const Eigen::Matrix4d h = build_hamiltonian_matrix(params, op);
    const DampingMatrix gamma = build_damping_matrix(params);
    const DriftDiffusion dd = build_drift_diffusion(h, gamma);
    if (!is_stable(dd.B)) return false;
    try {
        MomentState state{op.R0, solve_lyapunov(dd.B, dd.C), {"light", "mechanics"}};
        return check_physical(state);
    } catch (const SingularSystemError&) {
        return false;
    }
}

}  // namespace

SteadyOperatingPoint solve_operating_point(const PhysicalParams& params,
                                           OperatingPointOptions opts) {
    const std::vector<double> roots = operating_point_roots(params);

    std::vector<double> stable;
    for (double x : roots)
        if (root_is_stable_and_physical(params, x)) stable.push_back(x);

    if (stable.empty())
        throw UnstableError("solve_operating_point: no stable root among " +
                            std::to_string(roots.size()) + " real roots");
    if (stable.size() > 1 && !opts.select_smallest_x0) {
        std::string msg = "solve_operating_point: multistable, stable roots x0 =";
        for (double x : stable) msg += " " + std::to_string(x);
        throw MultistableError(std::move(msg), stable);
    }

    const double x0 = *std::min_element(stable.begin(), stable.end(),
                                        [](double l, double r) { return std::abs(l) < std::abs(r); });
    return operating_point_from_x0(params, x0);
}

Eigen::Matrix4d build_hamiltonian_matrix(const PhysicalParams& params,
                                         const SteadyOperatingPoint& op) {
    Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
    h(0, 0) = op.Delta_eff;
    h(1, 1) = op.Delta_eff;
    h(2, 2) = op.omega_eff;
    h(3, 3) = params.omega_m;
    h(0, 2) = h(2, 0) = op.g_eff * op.R0(0);
    h(1, 2) = h(2, 1) = op.g_eff * op.R0(1);
    return h;
}

DampingMatrix build_damping_matrix(const PhysicalParams& params) {
    using namespace std::complex_literals;
    const double nbar = thermal_occupation(params.omega_m, params.temperature);
    const double kappa = params.kappa;
    const double gm = params.Gamma_m;

    CMat gamma = CMat::Zero(4, 4);
    gamma(0, 0) = kappa / 2.0;
    gamma(0, 1) = -1.0i * (kappa / 2.0);
    gamma(1, 0) = 1.0i * (kappa / 2.0);
    gamma(1, 1) = kappa / 2.0;
    gamma(2, 2) = gm * (2.0 * nbar + 1.0) / 2.0;
    gamma(2, 3) = -1.0i * (gm / 2.0);
    gamma(3, 2) = 1.0i * (gm / 2.0);
    gamma(3, 3) = gm * (2.0 * nbar + 1.0) / 2.0;
    return make_damping_matrix(gamma);
}

SteadyState steady_state(const PhysicalParams& params, OperatingPointOptions opts) {
    SteadyState out;
    out.op = solve_operating_point(params, opts);
    const Eigen::Matrix4d h = build_hamiltonian_matrix(params, out.op);
    const DampingMatrix gamma = build_damping_matrix(params);
    const DriftDiffusion dd = build_drift_diffusion(h, gamma);
    out.state = MomentState{out.op.R0, solve_lyapunov(dd.B, dd.C), {"light", "mechanics"}};
    out.gaussianity_warning = out.op.photon_number < 50.0;
    return out;
}

}  // namespace omest
