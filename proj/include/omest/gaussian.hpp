#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace omest {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;

/// First moments and symmetric covariance of an N-mode Gaussian state,
/// quadrature ordering (X_1, P_1, ..., X_N, P_N), vacuum covariance = I/2.
struct MomentState {
    Vec first_moments;
    Mat covariance;
    std::vector<std::string> mode_labels;

    int n_modes() const { return static_cast<int>(first_moments.size()) / 2; }
};

/// Damping matrix with its symmetric/antisymmetric decomposition.
/// For physical inputs gamma_S is real and gamma_A purely imaginary.
struct DampingMatrix {
    CMat gamma;
    CMat gamma_S;
    CMat gamma_A;
};

/// Drift and diffusion matrices of the bilinear dissipative dynamics,
/// B = i H W + gamma_A W and C = -W gamma_S W, truncated to real.
struct DriftDiffusion {
    Mat B;
    Mat C;
};

/// Matrix of quadrature commutators W_ij = [R_i, R_j]: block diagonal with
/// 2x2 blocks [[0, i], [-i, 0]].
CMat commutator_matrix(int n_modes);

/// Decomposes gamma into (gamma + gamma^T)/2 and (gamma - gamma^T)/2.
std::pair<CMat, CMat> split_damping(const CMat& gamma);

DampingMatrix make_damping_matrix(const CMat& gamma);

/// H_freq is the Hamiltonian matrix divided by hbar (angular frequencies).
/// Throws ImaginaryResidueError if the complex intermediates fail to cancel.
DriftDiffusion build_drift_diffusion(const Mat& H_freq, const DampingMatrix& gamma,
                                     double imag_tol = 1e-12);

/// Solves B^T sigma + sigma B = C by full Kronecker vectorization and
/// symmetrizes the result. Throws SingularSystemError on rank deficiency.
Mat solve_lyapunov(const Mat& B, const Mat& C);

/// True iff all eigenvalues of B have strictly negative real part.
bool is_stable(const Mat& B);

/// Robertson-Schrodinger check: min eigenvalue of Hermitian 2*sigma + W >= -tol.
bool check_physical(const MomentState& state, double tol = 1e-9);

/// Smallest eigenvalue of 2*sigma + W; >= -tol means physical.
double physicality_margin(const MomentState& state);

/// Instantaneous time derivatives of the first moments and covariance under
/// the bilinear master equation; both vanish at the steady state.
std::pair<Vec, Mat> moment_time_derivatives(const MomentState& state, const Mat& H_freq,
                                            const DampingMatrix& gamma,
                                            double imag_tol = 1e-12);

/// Partial trace down to the selected modes (0-based mode indices).
MomentState reduce_state(const MomentState& state, const std::vector<int>& mode_subset);

}  // namespace omest
