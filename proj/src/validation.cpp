#include "omest/validation.hpp"

#include "omest/errors.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace omest {

namespace {

double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0) return 0.0;
    return std::abs(a - b) / scale;
}

double rel_diff(const Mat& a, const Mat& b) {
    const double scale = std::max(a.norm(), b.norm());
    if (scale == 0.0) return 0.0;
    return (a - b).norm() / scale;
}

struct SuiteAccumulator {
    CheckResult result;
    explicit SuiteAccumulator(std::string name) { result.name = std::move(name); }

    void check(bool ok, double metric, const std::string& context) {
        ++result.checks;
        if (metric > result.worst) result.worst = metric;
        if (!ok) {
            ++result.failures;
            if (result.detail.size() < 400) result.detail += context + "; ";
        }
    }

    CheckResult finish() {
        result.passed = result.failures == 0;
        return result;
    }
};

}  // namespace

FdGradients finite_difference_gradients(const PhysicalParams& params, double step_scale) {
    PhysicalParams base = params;
    base.g2 = params.g2_eff();
    base.variant = ModelVariant::quadratic;

    FdGradients out;
    const std::array<double, 2> g = {base.g1, base.g2};
    for (int i = 0; i < 2; ++i) {
        const double h = step_scale * std::max(std::abs(g[i]), base.Gamma_m);
        PhysicalParams plus = base, minus = base;
        (i == 0 ? plus.g1 : plus.g2) += h;
        (i == 0 ? minus.g1 : minus.g2) -= h;
        const SteadyState sp = steady_state(plus);
        const SteadyState sm = steady_state(minus);
        const double inv2h = 1.0 / (2.0 * h);
        out.dx0[i] = (sp.op.x0() - sm.op.x0()) * inv2h;
        out.dDelta_eff[i] = (sp.op.Delta_eff - sm.op.Delta_eff) * inv2h;
        out.dAlpha2[i] = (sp.op.photon_number - sm.op.photon_number) * inv2h;
        out.dOmega_eff[i] = (sp.op.omega_eff - sm.op.omega_eff) * inv2h;
        out.dG_eff[i] = (sp.op.g_eff - sm.op.g_eff) * inv2h;
        out.dR0[i] = (sp.op.R0 - sm.op.R0) * inv2h;
        out.dSigma[i] = (sp.state.covariance - sm.state.covariance) * inv2h;
        out.step[i] = h;
    }
    return out;
}

double fd_noise_floor(double base, double h) {
    return 32.0 * std::numeric_limits<double>::epsilon() * std::abs(base) / h;
}

std::optional<double> find_crossover(const std::vector<double>& x,
                                     const std::vector<double>& a,
                                     const std::vector<double>& b) {
    for (size_t i = 1; i < x.size(); ++i) {
        const double d0 = a[i - 1] - b[i - 1];
        const double d1 = a[i] - b[i];
        if (d0 == 0.0) return x[i - 1];
        if ((d0 < 0.0) != (d1 < 0.0)) {
            const double t = d0 / (d0 - d1);
            return x[i - 1] + t * (x[i] - x[i - 1]);
        }
    }
    return std::nullopt;
}

namespace {

std::string point_tag(const PhysicalParams& p) {
    std::ostringstream os;
    os << to_string(p.variant) << " T=" << p.temperature << " E=" << p.drive;
    return os.str();
}

void grid_pass(const Tolerances& tol, std::vector<CheckResult>& out) {
    SuiteAccumulator lyap("lyapunov_residual");
    SuiteAccumulator steady("steady_state_consistency");
    SuiteAccumulator phys("physicality");
    SuiteAccumulator sign("sign_and_monotonicity");
    SuiteAccumulator dom("fi_quantum_dominance");
    SuiteAccumulator local("local_qfi_monotonicity");

    const SweepConfig cfg = figure_preset("fig1a");
    for (ModelVariant v : cfg.variants)
        for (double t : cfg.temperatures) {
            double prev_alpha2 = -1.0;
            for (double e : cfg.drive_grid) {
                PhysicalParams p = cfg.base;
                p.variant = v;
                p.temperature = t;
                p.drive = e;
                const std::string tag = point_tag(p);

                const EstimationReport rep = estimate(p);
                const Eigen::Matrix4d h = build_hamiltonian_matrix(p, rep.op);
                const DampingMatrix gamma = build_damping_matrix(p);
                const DriftDiffusion dd = build_drift_diffusion(h, gamma);

                const double res =
                    (dd.B.transpose() * rep.sigma_bar + rep.sigma_bar * dd.B - dd.C).norm() /
                    std::max(1.0, dd.C.norm());
                lyap.check(res <= tol.lyapunov_residual, res, tag);

                MomentState displaced{Vec::Zero(4), rep.sigma_bar, {"light", "mechanics"}};
                const auto [dr, ds] = moment_time_derivatives(displaced, h, gamma);
                const double drn = dr.norm();
                const double dsn = ds.norm() / std::max(rep.sigma_bar.norm(),
                                                        dd.C.norm());
                steady.check(drn == 0.0 && dsn <= tol.steady_consistency, dsn, tag);

                MomentState full{rep.op.R0, rep.sigma_bar, {"light", "mechanics"}};
                bool ph = check_physical(full, tol.physicality);
                for (int m = 0; m < 2 && ph; ++m)
                    ph = check_physical(reduce_state(full, {m}), tol.physicality);
                phys.check(ph, ph ? 0.0 : 1.0, tag);

                sign.check(rep.op.x0() <= 0.0, rep.op.x0(), tag + " x0 sign");
                sign.check(rep.op.photon_number > prev_alpha2, 0.0, tag + " alpha2 monotone");
                prev_alpha2 = rep.op.photon_number;

                for (int k = 0; k < 4; ++k)
                    for (int i = 0; i < 2; ++i) {
                        const double j = rep.quadrature_J[k](i, i);
                        const double qi = rep.global.I(i, i);
                        dom.check(j <= qi * (1.0 + tol.fi_dominance),
                                  qi > 0 ? j / qi : 0.0, tag);
                    }
                for (int i = 0; i < 2; ++i) {
                    const double qi = rep.global.I(i, i) * (1.0 + tol.local_monotonicity);
                    local.check(rep.light.I(i, i) <= qi && rep.mechanics.I(i, i) <= qi,
                                0.0, tag);
                }
            }
        }
    out.push_back(lyap.finish());
    out.push_back(steady.finish());
    out.push_back(phys.finish());
    out.push_back(sign.finish());
    out.push_back(dom.finish());
    out.push_back(local.finish());
}

void gradient_suite(const Tolerances& tol, std::vector<CheckResult>& out) {
    SuiteAccumulator acc("gradient_finite_difference");
    const std::vector<double> grid = log_spaced(1e8, 3.8e9, 20);
    for (double t : {0.0, 1e-3, 8e-2})
        for (double e : grid) {
            PhysicalParams p = reference_params();
            p.temperature = t;
            p.drive = e;
            const SteadyState ss = steady_state(p);
            const OperatingPointGradients an = operating_point_gradients(p, ss.op);
            const auto dS = covariance_gradients(p, ss.op, ss.state.covariance, an);
            const FdGradients fd = finite_difference_gradients(p);
            const std::string tag = point_tag(p);

            for (int i = 0; i < 2; ++i) {
                // allowance = tol * scale + FD roundoff floor of the base value
                auto chk = [&](double a, double f, double base, const char* what) {
                    const double allow =
                        tol.gradient_fd * std::max(std::abs(a), std::abs(f)) +
                        fd_noise_floor(base, fd.step[i]);
                    const double r = std::abs(a - f) / allow;
                    acc.check(r <= 1.0, r, tag + " " + what);
                };
                chk(an.dx0[i], fd.dx0[i], ss.op.x0(), "dx0");
                chk(an.dDelta_eff[i], fd.dDelta_eff[i], ss.op.Delta_eff, "dDelta_eff");
                chk(an.dAlpha2[i], fd.dAlpha2[i], ss.op.photon_number, "dAlpha2");
                chk(an.dOmega_eff[i], fd.dOmega_eff[i], ss.op.omega_eff, "dOmega_eff");
                chk(an.dG_eff[i], fd.dG_eff[i], ss.op.g_eff, "dG_eff");
                for (int c = 0; c < 4; ++c)
                    chk(an.dR0[i](c), fd.dR0[i](c), ss.op.R0(c), "dR0");
                const double allow_s =
                    tol.gradient_fd * std::max(dS[i].norm(), fd.dSigma[i].norm()) +
                    fd_noise_floor(4.0 * ss.state.covariance.norm(), fd.step[i]);
                const double rs = (dS[i] - fd.dSigma[i]).norm() / allow_s;
                acc.check(rs <= 1.0, rs, tag + " dSigma");
            }
        }
    out.push_back(acc.finish());
}

void lyapunov_oracle_suite(const Tolerances& tol, std::vector<CheckResult>& out) {
    SuiteAccumulator acc("lyapunov_solver_oracle");
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    int produced = 0;
    while (produced < 100) {
        Mat b(4, 4), c0(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                b(i, j) = uni(rng);
                c0(i, j) = uni(rng);
            }
        // shift the spectrum left to make the instance stable
        Eigen::EigenSolver<Mat> es(b, false);
        b -= (es.eigenvalues().real().maxCoeff() + 0.5) * Mat::Identity(4, 4);
        if (!is_stable(b)) continue;
        Mat c = (c0 + c0.transpose()) / 2.0;

        const Mat sigma = solve_lyapunov(b, c);

        // independent route: row-major vectorization solved by QR
        Mat system = Mat::Zero(16, 16);
        Vec rhs(16);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                rhs(i * 4 + j) = c(i, j);
                for (int k = 0; k < 4; ++k) {
                    system(i * 4 + j, k * 4 + j) += b(k, i);  // (B^T sigma)_{ij}
                    system(i * 4 + j, i * 4 + k) += b(k, j);  // (sigma B)_{ij}
                }
            }
        Vec flat = Eigen::ColPivHouseholderQR<Mat>(system).solve(rhs);
        Mat oracle(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) oracle(i, j) = flat(i * 4 + j);
        oracle = ((oracle + oracle.transpose()) / 2.0).eval();

        const double r = rel_diff(sigma, oracle);
        acc.check(r <= tol.lyapunov_oracle, r, "random instance " + std::to_string(produced));
        ++produced;
    }
    out.push_back(acc.finish());
}

void variant_suite(const Tolerances& tol, std::vector<CheckResult>& out) {
    SuiteAccumulator acc("variant_agreement_at_g2_zero");
    const std::vector<double> grid = log_spaced(1e8, 3.8e9, 20);
    for (double t : {0.0, 8e-2})
        for (double e : grid) {
            PhysicalParams p = reference_params();
            p.g2 = 0.0;
            p.temperature = t;
            p.drive = e;
            p.variant = ModelVariant::quadratic;
            const SteadyState sq = steady_state(p);
            p.variant = ModelVariant::linear;
            const SteadyState sl = steady_state(p);
            const double r0 = rel_diff(Mat(sq.op.R0), Mat(sl.op.R0));
            const double rs = rel_diff(sq.state.covariance, sl.state.covariance);
            acc.check(r0 <= tol.variant_agreement && rs <= tol.variant_agreement,
                      std::max(r0, rs), point_tag(p));
        }
    out.push_back(acc.finish());
}

}  // namespace

std::vector<CheckResult> run_validation(const Tolerances& tol) {
    std::vector<CheckResult> out;
    grid_pass(tol, out);
    gradient_suite(tol, out);
    lyapunov_oracle_suite(tol, out);
    variant_suite(tol, out);
    return out;
}

}  // namespace omest
