#include "omest/gaussian.hpp"

#include "omest/errors.hpp"

#include <complex>

namespace omest {

using std::complex;
using namespace std::complex_literals;

CMat commutator_matrix(int n_modes) {
    if (n_modes < 1) throw DimensionError("commutator_matrix: n_modes must be >= 1");
    const int dim = 2 * n_modes;
    CMat w = CMat::Zero(dim, dim);
    for (int m = 0; m < n_modes; ++m) {
        w(2 * m, 2 * m + 1) = 1.0i;
        w(2 * m + 1, 2 * m) = -1.0i;
    }
    return w;
}

std::pair<CMat, CMat> split_damping(const CMat& gamma) {
    if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0)
        throw DimensionError("split_damping: gamma must be square with even dimension");
    CMat sym = (gamma + gamma.transpose()) / 2.0;
    CMat anti = (gamma - gamma.transpose()) / 2.0;
    return {std::move(sym), std::move(anti)};
}

DampingMatrix make_damping_matrix(const CMat& gamma) {
    auto [sym, anti] = split_damping(gamma);
    return DampingMatrix{gamma, std::move(sym), std::move(anti)};
}

namespace {

// Truncates a complex matrix to real after checking that the imaginary part
// is negligible relative to the matrix norm.
Mat real_part_checked(const CMat& m, double tol, const char* what) {
    const double scale = std::max(1.0, m.norm());
    const double residue = m.imag().norm();
    if (residue > tol * scale)
        throw ImaginaryResidueError(std::string(what) + ": imaginary residue " +
                                    std::to_string(residue / scale) + " exceeds tolerance");
    return m.real();
}

}  // namespace

DriftDiffusion build_drift_diffusion(const Mat& H_freq, const DampingMatrix& gamma,
                                     double imag_tol) {
    const auto dim = H_freq.rows();
    if (H_freq.cols() != dim) throw DimensionError("build_drift_diffusion: H_freq not square");
    if (gamma.gamma.rows() != dim)
        throw DimensionError("build_drift_diffusion: gamma dimension mismatch");
    const CMat w = commutator_matrix(static_cast<int>(dim) / 2);

    CMat b = 1.0i * H_freq.cast<complex<double>>() * w + gamma.gamma_A * w;
    CMat c = -w * gamma.gamma_S * w;

    DriftDiffusion out;
    out.B = real_part_checked(b, imag_tol, "drift B");
    out.C = real_part_checked(c, imag_tol, "diffusion C");
    out.C = (out.C + out.C.transpose()).eval() / 2.0;
    return out;
}

Mat solve_lyapunov(const Mat& B, const Mat& C) {
    const auto n = B.rows();
    if (B.cols() != n || C.rows() != n || C.cols() != n)
        throw DimensionError("solve_lyapunov: dimension mismatch");

    // vec(B^T sigma + sigma B) = (I (x) B^T + B^T (x) I) vec(sigma)
    const auto nn = n * n;
    Mat system = Mat::Zero(nn, nn);
    for (Eigen::Index j = 0; j < n; ++j) {
        system.block(j * n, j * n, n, n) += B.transpose();
        for (Eigen::Index k = 0; k < n; ++k)
            system.block(j * n, k * n, n, n) += B(k, j) * Mat::Identity(n, n);
    }

    Eigen::FullPivLU<Mat> lu(system);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible())
        throw SingularSystemError("solve_lyapunov: vectorized system is rank-deficient");

    Vec vec_c(nn);
    for (Eigen::Index j = 0; j < n; ++j) vec_c.segment(j * n, n) = C.col(j);
    Vec vec_sigma = lu.solve(vec_c);

    Mat sigma(n, n);
    for (Eigen::Index j = 0; j < n; ++j) sigma.col(j) = vec_sigma.segment(j * n, n);
    sigma = (sigma + sigma.transpose()).eval() / 2.0;

    const double residual = (B.transpose() * sigma + sigma * B - C).norm();
    if (residual > 1e-10 * std::max(1.0, C.norm()))
        throw SingularSystemError("solve_lyapunov: residual above tolerance");
    return sigma;
}

bool is_stable(const Mat& B) {
    Eigen::EigenSolver<Mat> es(B, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("is_stable: eigensolver failed");
    return es.eigenvalues().real().maxCoeff() < 0.0;
}

double physicality_margin(const MomentState& state) {
    const int n = state.n_modes();
    CMat m = 2.0 * state.covariance.cast<complex<double>>() + commutator_matrix(n);
    Eigen::SelfAdjointEigenSolver<CMat> es(m);
    return es.eigenvalues().minCoeff();
}

bool check_physical(const MomentState& state, double tol) {
    return physicality_margin(state) >= -tol;
}

std::pair<Vec, Mat> moment_time_derivatives(const MomentState& state, const Mat& H_freq,
                                            const DampingMatrix& gamma, double imag_tol) {
    const auto dim = state.first_moments.size();
    if (H_freq.rows() != dim || state.covariance.rows() != dim)
        throw DimensionError("moment_time_derivatives: dimension mismatch");
    const CMat w = commutator_matrix(static_cast<int>(dim) / 2);

    CMat drift_c = -1.0i * w * H_freq.cast<complex<double>>() + w * gamma.gamma_A;
    Mat drift_t = real_part_checked(drift_c, imag_tol, "moment drift");  // equals B^T

    Vec dR0 = drift_t * state.first_moments;

    CMat noise_c = w * gamma.gamma_S * w;
    Mat noise = real_part_checked(noise_c, imag_tol, "moment diffusion");
    Mat dSigma = drift_t * state.covariance + state.covariance * drift_t.transpose() + noise;
    dSigma = (dSigma + dSigma.transpose()).eval() / 2.0;
    return {std::move(dR0), std::move(dSigma)};
}

MomentState reduce_state(const MomentState& state, const std::vector<int>& mode_subset) {
    if (mode_subset.empty()) throw DimensionError("reduce_state: empty mode subset");
    const int n = state.n_modes();
    for (int m : mode_subset)
        if (m < 0 || m >= n) throw DimensionError("reduce_state: mode index out of range");

    const int nr = static_cast<int>(mode_subset.size());
    MomentState out;
    out.first_moments.resize(2 * nr);
    out.covariance.resize(2 * nr, 2 * nr);
    for (int a = 0; a < nr; ++a) {
        const int ma = mode_subset[a];
        out.first_moments.segment(2 * a, 2) = state.first_moments.segment(2 * ma, 2);
        if (!state.mode_labels.empty()) out.mode_labels.push_back(state.mode_labels[ma]);
        for (int b = 0; b < nr; ++b)
            out.covariance.block(2 * a, 2 * b, 2, 2) =
                state.covariance.block(2 * ma, 2 * mode_subset[b], 2, 2);
    }
    return out;
}

}  // namespace omest
