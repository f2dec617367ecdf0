#pragma once

#include <Eigen/Dense>

namespace gridquant {

/// Eigen-decomposition of a symmetric positive semidefinite matrix W = Q diag(lambda) Q^T.
struct SpectralData {
  Eigen::VectorXd eigenvalues;   ///< descending
  Eigen::MatrixXd eigenvectors;  ///< column j pairs with eigenvalues[j]
  double lambda_max = 0.0;
  double lambda_min_plus = 0.0;  ///< smallest eigenvalue above the zero threshold
  Eigen::Index zero_count = 0;

  Eigen::MatrixXd reconstruct() const;
};

/// Eigenvalues below this fraction of lambda_max count as zero.
inline constexpr double kZeroEigenThreshold = 1e-9;

/// Cyclic Jacobi rotations. Eigenvector signs are normalized so the first entry with
/// magnitude above 1e-12 is positive. Throws Errc::NoConvergence past max_sweeps.
SpectralData eig_sym(const Eigen::MatrixXd& w, int max_sweeps = 100);

/// Square-root factor of W (x) I_d restricted to the nonzero spectrum.
///
/// abar = Lambda_+^{1/2} Q_+^T and m_map = (abar abar^T)^{-1} abar = Lambda_+^{-1/2} Q_+^T,
/// both (N-1) x N. Block maps act per message dimension; the Kronecker product with I_d
/// is never formed.
struct SqrtFactor {
  Eigen::MatrixXd abar;
  Eigen::MatrixXd m_map;
  Eigen::Index dim = 1;
  double lambda_max = 0.0;
  double lambda_min_plus = 0.0;

  /// ||M||_2 and ||abar^T||_2.
  double m1() const;
  double m2() const;

  /// Applies a (rows x N) matrix to a stacked vector of N blocks of length dim.
  Eigen::VectorXd apply_blocks(const Eigen::MatrixXd& op, const Eigen::VectorXd& x) const;
};

/// Throws Errc::RankDeficiency unless exactly one eigenvalue is zero.
SqrtFactor sqrt_factor(const SpectralData& s, Eigen::Index dim);

/// Distance from x to Im(W (x) I_d): the norm of its component along constants (x) I_d.
double image_residual(const Eigen::VectorXd& x, Eigen::Index nodes, Eigen::Index dim);

/// ||M x||_2. Throws Errc::NotInImage if x is not (numerically) in Im(W (x) I_d).
double m_norm(const Eigen::VectorXd& x, const SqrtFactor& f, double rel_tol = 1e-8);

}  // namespace gridquant
