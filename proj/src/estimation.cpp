#include "omest/estimation.hpp"

#include "omest/errors.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <limits>

namespace omest {

using std::complex;
using namespace std::complex_literals;

namespace {

// Partial derivatives of the cleared-denominator fixed-point equation
//   F(x; g1, g2) = x [a (Delta^2 + b) + 2 g2 w_m E^2] + sqrt(2) g1 w_m E^2.
struct FixedPointPartials {
    double dF_dx, dF_dg1, dF_dg2, scale;
};

FixedPointPartials fixed_point_partials(const PhysicalParams& params,
                                        const SteadyOperatingPoint& op) {
    const double a = params.omega_m * params.omega_m + params.Gamma_m * params.Gamma_m / 4.0;
    const double b = params.kappa * params.kappa / 4.0;
    const double q = params.g2_eff();
    const double e2 = params.drive * params.drive;
    const double wm = params.omega_m;
    const double x = op.x0();
    const double d = op.Delta_eff;
    const double s2 = std::sqrt(2.0);

    FixedPointPartials out;
    out.dF_dx = a * (d * d + b) + 2.0 * q * wm * e2 + 2.0 * a * x * d * op.g_eff;
    out.dF_dg1 = -2.0 * s2 * a * x * x * d + s2 * wm * e2;
    out.dF_dg2 = x * (2.0 * a * d * x * x + 2.0 * wm * e2);
    out.scale = std::max({std::abs(a * (d * d + b)), std::abs(2.0 * q * wm * e2),
                          std::abs(2.0 * a * x * d * op.g_eff), 1.0});
    return out;
}

}  // namespace

OperatingPointGradients operating_point_gradients(const PhysicalParams& params,
                                                  const SteadyOperatingPoint& op) {
    const FixedPointPartials f = fixed_point_partials(params, op);
    if (std::abs(f.dF_dx) < 1e-12 * f.scale)
        throw DegenerateRootError("operating_point_gradients: fold point, dF/dx0 ~ 0");

    const double q = params.g2_eff();
    const double x = op.x0();
    const double d = op.Delta_eff;
    const double b = params.kappa * params.kappa / 4.0;
    const double e = params.drive;
    const double denom = d * d + b;
    const double s2 = std::sqrt(2.0);
    const double alpha2 = op.photon_number;

    OperatingPointGradients g;
    const std::array<double, 2> dF_dg = {f.dF_dg1, f.dF_dg2};
    const std::array<double, 2> dDelta_explicit = {-s2 * x, x * x};
    for (int i = 0; i < 2; ++i) {
        g.dx0[i] = -dF_dg[i] / f.dF_dx;
        g.dDelta_eff[i] = op.g_eff * g.dx0[i] + dDelta_explicit[i];
        g.dQ0[i] = -s2 * e * (b - d * d) / (denom * denom) * g.dDelta_eff[i];
        g.dP0[i] = s2 * params.kappa * e * d / (denom * denom) * g.dDelta_eff[i];
        g.dp0[i] = params.Gamma_m / (2.0 * params.omega_m) * g.dx0[i];
        g.dAlpha2[i] = -2.0 * d * e * e / (denom * denom) * g.dDelta_eff[i];
    }
    g.dOmega_eff[0] = 2.0 * q * g.dAlpha2[0];
    g.dOmega_eff[1] = 2.0 * alpha2 + 2.0 * q * g.dAlpha2[1];
    g.dG_eff[0] = -s2 + 2.0 * q * g.dx0[0];
    g.dG_eff[1] = 2.0 * x + 2.0 * q * g.dx0[1];
    for (int i = 0; i < 2; ++i) g.dR0[i] << g.dQ0[i], g.dP0[i], g.dx0[i], g.dp0[i];
    return g;
}

std::array<Eigen::Matrix4d, 2> covariance_gradients(const PhysicalParams& params,
                                                    const SteadyOperatingPoint& op,
                                                    const Eigen::Matrix4d& sigma_bar,
                                                    const OperatingPointGradients& grads) {
    const Eigen::Matrix4d h = build_hamiltonian_matrix(params, op);
    const DampingMatrix gamma = build_damping_matrix(params);
    const DriftDiffusion dd = build_drift_diffusion(h, gamma);
    const CMat w = commutator_matrix(2);

    std::array<Eigen::Matrix4d, 2> out;
    for (int i = 0; i < 2; ++i) {
        Eigen::Matrix4d dh = Eigen::Matrix4d::Zero();
        dh(0, 0) = dh(1, 1) = grads.dDelta_eff[i];
        dh(2, 2) = grads.dOmega_eff[i];
        dh(0, 2) = dh(2, 0) = grads.dG_eff[i] * op.R0(0) + op.g_eff * grads.dQ0[i];
        dh(1, 2) = dh(2, 1) = grads.dG_eff[i] * op.R0(1) + op.g_eff * grads.dP0[i];

        // The gamma_A W term of B carries no coupling dependence.
        const Eigen::Matrix4d db = (1.0i * dh.cast<complex<double>>() * w).real();
        const Eigen::Matrix4d rhs =
            -(db.transpose() * sigma_bar + sigma_bar * db);
        Eigen::Matrix4d ds = solve_lyapunov(dd.B, rhs);
        out[i] = (ds + ds.transpose()) / 2.0;
    }
    return out;
}

QfimResult qfim(const std::array<Vec, 2>& dR0, const Mat& sigma_bar,
                const std::array<Mat, 2>& dSigma, double omega_m, double physical_tol) {
    const auto n = sigma_bar.rows();
    MomentState probe{Vec::Zero(n), sigma_bar, {}};
    if (!check_physical(probe, physical_tol))
        throw NonPhysicalStateError("qfim: sigma_bar violates the uncertainty relation");

    QfimResult res;

    // First-moment contribution via an SPD solve of sigma.
    Eigen::LDLT<Mat> ldlt(sigma_bar);
    std::array<Vec, 2> solved = {ldlt.solve(dR0[0]), ldlt.solve(dR0[1])};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) res.averages_term(i, j) = dR0[i].dot(solved[j]);

    // Covariance contribution: represent X -> 4 sigma X sigma + W X W on the
    // vectorized matrix space and apply the Moore-Penrose pseudoinverse.
    // The sandwich uses the real symplectic form Omega = W / i; with the
    // imaginary commutator matrix itself the formula fails the thermal-state
    // oracle (it would give 2/(2n^2+2n+1) instead of 1/(n(n+1))).
    const CMat w = commutator_matrix(static_cast<int>(n) / 2);
    const Mat omega = (-1.0i * w).real();
    const CMat sc = sigma_bar.cast<complex<double>>();
    CMat superop = 4.0 * Eigen::kroneckerProduct(sc, sc) +
                   Eigen::kroneckerProduct(omega.transpose(), omega).eval()
                       .cast<complex<double>>();

    Eigen::SelfAdjointEigenSolver<CMat> es(superop);
    const Vec evals = es.eigenvalues();
    const double cutoff = 1e-12 * evals.cwiseAbs().maxCoeff();
    Vec inv_evals = Vec::Zero(evals.size());
    for (Eigen::Index k = 0; k < evals.size(); ++k)
        if (std::abs(evals(k)) > cutoff) inv_evals(k) = 1.0 / evals(k);

    std::array<Eigen::VectorXcd, 2> vec_ds;
    for (int i = 0; i < 2; ++i) {
        Eigen::VectorXcd v(n * n);
        for (Eigen::Index c = 0; c < n; ++c)
            v.segment(c * n, n) = dSigma[i].col(c).cast<complex<double>>();
        vec_ds[i] = v;
    }
    std::array<Eigen::VectorXcd, 2> pinv_applied;
    for (int j = 0; j < 2; ++j)
        pinv_applied[j] = es.eigenvectors() *
                          (inv_evals.cast<complex<double>>().asDiagonal() *
                           (es.eigenvectors().adjoint() * vec_ds[j]));

    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            // Tr[dSigma_i Y_j] = vec(dSigma_i)^T vec(Y_j) for symmetric dSigma_i
            const complex<double> t =
                2.0 * (vec_ds[i].transpose() * pinv_applied[j])(0, 0);
            res.variances_term(i, j) = t.real();
        }

    res.averages_term = ((res.averages_term + res.averages_term.transpose()) / 2.0).eval();
    res.variances_term = ((res.variances_term + res.variances_term.transpose()) / 2.0).eval();
    res.I = res.averages_term + res.variances_term;
    res.I_dimensionless = omega_m * omega_m * res.I;
    return res;
}

const char* to_string(QuadratureIndex q) {
    switch (q) {
        case QuadratureIndex::Q: return "Q";
        case QuadratureIndex::P: return "P";
        case QuadratureIndex::Xb: return "Xb";
        default: return "Pb";
    }
}

Eigen::Matrix2d quadrature_fi(QuadratureIndex k, const SteadyOperatingPoint& op,
                              const Eigen::Matrix4d& sigma_bar,
                              const OperatingPointGradients& grads,
                              const std::array<Eigen::Matrix4d, 2>& dSigma) {
    const int idx = static_cast<int>(k);
    const double skk = sigma_bar(idx, idx);
    if (skk <= 0.0)
        throw DegenerateVarianceError("quadrature_fi: non-positive variance");
    (void)op;

    Eigen::Matrix2d j;
    for (int i = 0; i < 2; ++i)
        for (int jj = 0; jj < 2; ++jj) {
            const double ds_i = grads.dR0[i](idx);
            const double ds_j = grads.dR0[jj](idx);
            const double dv_i = dSigma[i](idx, idx);
            const double dv_j = dSigma[jj](idx, idx);
            j(i, jj) = (2.0 * skk * ds_j * ds_i + dv_j * dv_i) / (2.0 * skk * skk);
        }
    return j;
}

namespace {

QfimResult reduced_qfim(const MomentState& full, const OperatingPointGradients& grads,
                        const std::array<Eigen::Matrix4d, 2>& dSigma, int mode,
                        double omega_m) {
    const MomentState red = reduce_state(full, {mode});
    std::array<Vec, 2> dr;
    std::array<Mat, 2> ds;
    for (int i = 0; i < 2; ++i) {
        dr[i] = grads.dR0[i].segment(2 * mode, 2);
        ds[i] = dSigma[i].block(2 * mode, 2 * mode, 2, 2);
    }
    return qfim(dr, red.covariance, ds, omega_m);
}

}  // namespace

LocalQfims local_qfim(const PhysicalParams& params, OperatingPointOptions opts) {
    const SteadyState ss = steady_state(params, opts);
    const OperatingPointGradients grads = operating_point_gradients(params, ss.op);
    const Eigen::Matrix4d sigma = ss.state.covariance;
    const auto dSigma = covariance_gradients(params, ss.op, sigma, grads);

    std::array<Vec, 2> dr = {grads.dR0[0], grads.dR0[1]};
    std::array<Mat, 2> ds = {dSigma[0], dSigma[1]};

    LocalQfims out;
    out.global = qfim(dr, sigma, ds, params.omega_m);
    out.light = reduced_qfim(ss.state, grads, dSigma, 0, params.omega_m);
    out.mechanics = reduced_qfim(ss.state, grads, dSigma, 1, params.omega_m);
    return out;
}

ErrorBounds error_bounds(const Eigen::Matrix2d& info, double g1, double g2, int runs) {
    if (runs < 1) throw ConfigError("error_bounds: runs must be >= 1");
    ErrorBounds out;
    const std::array<double, 2> g = {g1, g2};
    for (int i = 0; i < 2; ++i) {
        const double ii = info(i, i);
        out.relative[i] = (ii > 0.0 && g[i] != 0.0)
                              ? 1.0 / (g[i] * std::sqrt(runs * ii))
                              : std::numeric_limits<double>::infinity();
    }
    Eigen::FullPivLU<Eigen::Matrix2d> lu(info);
    lu.setThreshold(1e-13);
    if (lu.isInvertible())
        out.covariance_bound = (lu.inverse() / static_cast<double>(runs)).eval();
    return out;
}

EstimationReport estimate(const PhysicalParams& params, int runs, OperatingPointOptions opts) {
    EstimationReport rep;
    rep.runs = runs;
    const SteadyState ss = steady_state(params, opts);
    rep.op = ss.op;
    rep.gaussianity_warning = ss.gaussianity_warning;
    rep.sigma_bar = ss.state.covariance;
    rep.gradients = operating_point_gradients(params, ss.op);
    rep.dSigma = covariance_gradients(params, ss.op, rep.sigma_bar, rep.gradients);

    std::array<Vec, 2> dr = {rep.gradients.dR0[0], rep.gradients.dR0[1]};
    std::array<Mat, 2> ds = {rep.dSigma[0], rep.dSigma[1]};
    rep.global = qfim(dr, rep.sigma_bar, ds, params.omega_m);
    rep.light = reduced_qfim(ss.state, rep.gradients, rep.dSigma, 0, params.omega_m);
    rep.mechanics = reduced_qfim(ss.state, rep.gradients, rep.dSigma, 1, params.omega_m);

    for (int k = 0; k < 4; ++k)
        rep.quadrature_J[k] = quadrature_fi(static_cast<QuadratureIndex>(k), rep.op,
                                            rep.sigma_bar, rep.gradients, rep.dSigma);

    rep.bound_global = error_bounds(rep.global.I, params.g1, params.g2, runs);
    rep.bound_light = error_bounds(rep.light.I, params.g1, params.g2, runs);
    rep.bound_mechanics = error_bounds(rep.mechanics.I, params.g1, params.g2, runs);
    for (int k = 0; k < 4; ++k)
        rep.bound_quadrature[k] = error_bounds(rep.quadrature_J[k], params.g1, params.g2, runs);
    return rep;
}

}  // namespace omest
