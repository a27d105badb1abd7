#include "omest/errors.hpp"
#include "omest/estimation.hpp"
#include "omest/sweep.hpp"
#include "omest/validation.hpp"

#include <doctest.h>
#include <fidelity_oracle.hpp>

#include <cmath>

using namespace omest;

namespace {

PhysicalParams base_params(double drive = 1e8, double t = 0.0) {
    PhysicalParams p = reference_params();
    p.drive = drive;
    p.temperature = t;
    return p;
}

}  // namespace

TEST_CASE("decoupled dx0/dg1 has closed form") {
    PhysicalParams p = base_params();
    p.g1 = 0.0;
    p.g2 = 0.0;
    auto op = solve_operating_point(p);
    auto g = operating_point_gradients(p, op);
    const double a = p.omega_m * p.omega_m + p.Gamma_m * p.Gamma_m / 4.0;
    const double d = p.Delta_0 * p.Delta_0 + p.kappa * p.kappa / 4.0;
    const double expect = -std::sqrt(2.0) * p.omega_m * p.drive * p.drive / (a * d);
    CHECK(g.dx0[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(g.dx0[1] == doctest::Approx(0.0).scale(std::abs(expect)));
    // with x0 = 0, g2 moves nothing to first order
    CHECK(g.dDelta_eff[1] == doctest::Approx(0.0).scale(1.0));
    // p0 tracks x0 through the damping ratio
    CHECK(g.dp0[0] == doctest::Approx((p.Gamma_m / (2.0 * p.omega_m)) * g.dx0[0]).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
    for (double t : {0.0, 8e-2}) {
        for (double e : {1e8, 1e9}) {
            PhysicalParams p = base_params(e, t);
            auto op = solve_operating_point(p);
            auto ss = steady_state(p);
            auto g = operating_point_gradients(p, op);
            auto ds = covariance_gradients(p, op, ss.state.covariance, g);
            auto fd = finite_difference_gradients(p);
            for (int i = 0; i < 2; ++i) {
                // certify to 1e-5 relative, above the FD roundoff floor of
                // each differenced base quantity
                auto close = [&](double a, double f, double base) {
                    return std::abs(a - f) <=
                           1e-5 * std::max(std::abs(a), std::abs(f)) +
                               fd_noise_floor(base, fd.step[i]);
                };
                CHECK(close(g.dx0[i], fd.dx0[i], op.x0()));
                CHECK(close(g.dDelta_eff[i], fd.dDelta_eff[i], op.Delta_eff));
                CHECK(close(g.dAlpha2[i], fd.dAlpha2[i], op.photon_number));
                CHECK(close(g.dOmega_eff[i], fd.dOmega_eff[i], op.omega_eff));
                CHECK(close(g.dG_eff[i], fd.dG_eff[i], op.g_eff));
                for (int c = 0; c < 4; ++c) CHECK(close(g.dR0[i](c), fd.dR0[i](c), op.R0(c)));
                CHECK((ds[i] - fd.dSigma[i]).norm() <=
                      1e-5 * std::max(ds[i].norm(), fd.dSigma[i].norm()) +
                          fd_noise_floor(4.0 * ss.state.covariance.norm(), fd.step[i]));
                // covariance derivative inherits the symmetry of sigma
                CHECK((ds[i] - ds[i].transpose()).norm() ==
                      doctest::Approx(0.0).scale(std::max(1.0, ds[i].norm())));
            }
        }
    }
}

TEST_CASE("finite differences converge under step halving") {
    PhysicalParams p = base_params(1e9, 8e-2);
    auto op = solve_operating_point(p);
    auto g = operating_point_gradients(p, op);
    auto coarse = finite_difference_gradients(p, 1e-5);
    auto fine = finite_difference_gradients(p, 5e-6);
    // central differences: error ~ h^2, so halving shrinks it ~4x
    const double err_c = std::abs(coarse.dx0[0] - g.dx0[0]);
    const double err_f = std::abs(fine.dx0[0] - g.dx0[0]);
    CHECK(err_f < err_c);
}

TEST_CASE("qfim on hand-built families") {
    const double wm = 1.1e7;
    Mat sigma = 0.5 * Mat::Identity(2, 2);

    SUBCASE("zero derivatives give zero information") {
        std::array<Vec, 2> dr{Vec::Zero(2), Vec::Zero(2)};
        std::array<Mat, 2> ds{Mat::Zero(2, 2), Mat::Zero(2, 2)};
        auto r = qfim(dr, sigma, ds, wm);
        CHECK(r.I.norm() == doctest::Approx(0.0));
        CHECK(r.averages_term.norm() == doctest::Approx(0.0));
        CHECK(r.variances_term.norm() == doctest::Approx(0.0));
    }

    SUBCASE("coherent family: I = (dmu)^T sigma^{-1} (dmu)") {
        Vec d1(2), d2(2);
        d1 << 1.0, 0.0;
        d2 << 0.3, -0.7;
        std::array<Vec, 2> dr{d1, d2};
        std::array<Mat, 2> ds{Mat::Zero(2, 2), Mat::Zero(2, 2)};
        auto r = qfim(dr, sigma, ds, wm);
        CHECK(r.I(0, 0) == doctest::Approx(2.0 * d1.dot(d1)).epsilon(1e-12));
        CHECK(r.I(1, 1) == doctest::Approx(2.0 * d2.dot(d2)).epsilon(1e-12));
        CHECK(r.I(0, 1) == doctest::Approx(2.0 * d1.dot(d2)).epsilon(1e-12));
        CHECK(r.variances_term.norm() == doctest::Approx(0.0));
        CHECK((r.I_dimensionless - wm * wm * r.I).norm() == doctest::Approx(0.0));
    }

    SUBCASE("thermal family: I_nn = 1/(n(n+1))") {
        for (double n : {0.5, 2.0, 951.6}) {
            Mat st = (n + 0.5) * Mat::Identity(2, 2);
            std::array<Vec, 2> dr{Vec::Zero(2), Vec::Zero(2)};
            std::array<Mat, 2> ds{Mat::Identity(2, 2), Mat::Zero(2, 2)};
            auto r = qfim(dr, st, ds, wm);
            CHECK(r.I(0, 0) == doctest::Approx(1.0 / (n * (n + 1.0))).epsilon(1e-10));
            CHECK(r.averages_term(0, 0) == doctest::Approx(0.0));
        }
    }

    SUBCASE("non-physical covariance is rejected") {
        Mat bad = 0.2 * Mat::Identity(2, 2);
        std::array<Vec, 2> dr{Vec::Zero(2), Vec::Zero(2)};
        std::array<Mat, 2> ds{Mat::Zero(2, 2), Mat::Zero(2, 2)};
        CHECK_THROWS_AS(qfim(dr, bad, ds, wm), NonPhysicalStateError);
    }
}

TEST_CASE("qfim agrees with the Uhlmann fidelity oracle") {
    // finite-temperature points: the fidelity determinant resolves 1 - F there
    for (auto [e, t] : {std::pair{1e8, 8e-2}, {1e9, 8e-2}, {1e9, 1e-3}}) {
        PhysicalParams p = base_params(e, t);
        auto rep = estimate(p);
        const double i11 = rep.global.I(0, 0);
        const double eps = std::sqrt(8.0 * 1e-4 / i11);  // targets 1 - F ~ 1e-4
        auto qfi_fd = [&](double step) {
            PhysicalParams a = p, b = p;
            a.g1 -= step / 2.0;
            b.g1 += step / 2.0;
            auto sa = steady_state(a);
            auto sb = steady_state(b);
            const double f = testing::gaussian_fidelity(sa.op.R0, sa.state.covariance,
                                                        sb.op.R0, sb.state.covariance);
            return 8.0 * (1.0 - f) / (step * step);
        };
        // Richardson extrapolation removes the O(step^2) bias
        const double q1 = qfi_fd(eps), q2 = qfi_fd(eps / 2.0);
        const double extrap = (4.0 * q2 - q1) / 3.0;
        CHECK(extrap == doctest::Approx(i11).epsilon(1e-4));
    }
}

TEST_CASE("fidelity oracle self-checks") {
    // coherent states: F = exp(-|alpha - beta|^2 / 2) = exp(-d^2/4) in quadratures
    Vec m1 = Vec::Zero(2), m2(2);
    m2 << 0.3, 0.0;
    Mat vac = 0.5 * Mat::Identity(2, 2);
    CHECK(testing::gaussian_fidelity(m1, vac, m2, vac) ==
          doctest::Approx(std::exp(-0.09 / 4.0)).epsilon(1e-12));
    // vacuum vs thermal: F = 1/sqrt(n+1)
    const double n = 2.0;
    Mat th = (n + 0.5) * Mat::Identity(2, 2);
    CHECK(testing::gaussian_fidelity(m1, vac, m1, th) ==
          doctest::Approx(1.0 / std::sqrt(n + 1.0)).epsilon(1e-10));
    CHECK(testing::gaussian_fidelity(m1, th, m1, th) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("quadrature FI stays below the quantum bound") {
    PhysicalParams p = base_params(1e9, 8e-2);
    auto rep = estimate(p);
    for (int q = 0; q < 4; ++q)
        for (int i = 0; i < 2; ++i)
            CHECK(rep.quadrature_J[q](i, i) <= rep.global.I(i, i) * (1.0 + 1e-9));
}

TEST_CASE("quadrature FI against the Gaussian scalar formula") {
    PhysicalParams p = base_params(1e9, 8e-2);
    auto op = solve_operating_point(p);
    auto ss = steady_state(p);
    auto g = operating_point_gradients(p, op);
    auto ds = covariance_gradients(p, op, ss.state.covariance, g);
    // direct evaluation of J_ij = [2 s (ds0_i)(ds0_j) + (dS_i)(dS_j)] / (2 s^2)
    for (int k = 0; k < 4; ++k) {
        auto J = quadrature_fi(static_cast<QuadratureIndex>(k), op, ss.state.covariance, g, ds);
        const double s = ss.state.covariance(k, k);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double expect = (2.0 * s * g.dR0[i](k) * g.dR0[j](k) +
                                       ds[i](k, k) * ds[j](k, k)) /
                                      (2.0 * s * s);
                CHECK(J(i, j) == doctest::Approx(expect).epsilon(1e-12));
            }
    }
}

TEST_CASE("local qfims never exceed the global one") {
    for (double t : {0.0, 8e-2}) {
        PhysicalParams p = base_params(5e8, t);
        auto lq = local_qfim(p);
        for (int i = 0; i < 2; ++i) {
            CHECK(lq.light.I(i, i) <= lq.global.I(i, i) * (1.0 + 1e-9));
            CHECK(lq.mechanics.I(i, i) <= lq.global.I(i, i) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("error bounds") {
    Eigen::Matrix2d info;
    info << 4.0, 0.0, 0.0, 1.0;
    auto b1 = error_bounds(info, 2.0, 0.5, 1);
    CHECK(b1.relative[0] == doctest::Approx(1.0 / (2.0 * 2.0)).epsilon(1e-14));
    CHECK(b1.relative[1] == doctest::Approx(1.0 / 0.5).epsilon(1e-14));
    // M runs shrink the bound by sqrt(M)
    auto b100 = error_bounds(info, 2.0, 0.5, 100);
    CHECK(b100.relative[0] == doctest::Approx(b1.relative[0] / 10.0).epsilon(1e-14));
    REQUIRE(b1.covariance_bound.has_value());
    CHECK((*b1.covariance_bound - info.inverse()).norm() == doctest::Approx(0.0));

    // singular information: infinite bound, no covariance matrix
    Eigen::Matrix2d sing = Eigen::Matrix2d::Zero();
    auto bs = error_bounds(sing, 2.0, 0.5, 1);
    CHECK(std::isinf(bs.relative[0]));
    CHECK_FALSE(bs.covariance_bound.has_value());
}

TEST_CASE("dimensionless rescaling is consistent") {
    PhysicalParams p = base_params(1e9, 8e-2);
    auto rep = estimate(p);
    CHECK((rep.global.I_dimensionless - p.omega_m * p.omega_m * rep.global.I).norm() ==
          doctest::Approx(0.0).scale(rep.global.I_dimensionless.norm()));
    // the dimensionless QFIM is what a solver in units of omega_m = 1 would get;
    // relative error bounds are invariant under the rescaling
    auto bd = error_bounds(rep.global.I_dimensionless, p.g1 / p.omega_m, p.g2 / p.omega_m, 1);
    auto bs = error_bounds(rep.global.I, p.g1, p.g2, 1);
    CHECK(bd.relative[0] == doctest::Approx(bs.relative[0]).epsilon(1e-12));
    CHECK(bd.relative[1] == doctest::Approx(bs.relative[1]).epsilon(1e-12));
}

TEST_CASE("estimate composes a consistent report") {
    PhysicalParams p = base_params(1e9, 8e-2);
    auto rep = estimate(p, 4);
    CHECK(rep.runs == 4);
    CHECK(rep.bound_global.relative[0] ==
          doctest::Approx(1.0 / (p.g1 * std::sqrt(4.0 * rep.global.I(0, 0)))).epsilon(1e-12));
    // decomposition adds up
    CHECK((rep.global.averages_term + rep.global.variances_term - rep.global.I).norm() ==
          doctest::Approx(0.0).scale(rep.global.I.norm()));
    // light + mechanics bounds are looser than global
    CHECK(rep.bound_light.relative[0] >= rep.bound_global.relative[0] * (1.0 - 1e-9));
    CHECK(rep.bound_mechanics.relative[0] >= rep.bound_global.relative[0] * (1.0 - 1e-9));
}
