#include "gridquant/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "gridquant/error.hpp"

namespace gridquant {

Eigen::MatrixXd SpectralData::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

// Zeroes a(p, q) with the rotation of Golub & Van Loan, Alg. 8.5.1.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

SpectralData eig_sym(const Eigen::MatrixXd& w, int max_sweeps) {
  if (w.rows() != w.cols() || w.rows() == 0) {
    raise(Errc::InvalidArgument, "eig_sym needs a non-empty square matrix");
  }
  const Eigen::Index n = w.rows();
  const double scale = w.norm();
  if ((w - w.transpose()).norm() > 1e-12 * std::max(scale, 1.0)) {
    raise(Errc::InvalidArgument, "eig_sym input is not symmetric");
  }

  Eigen::MatrixXd a = 0.5 * (w + w.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double tol = 1e-14 * std::max(scale, std::numeric_limits<double>::min());

  bool converged = off_diagonal_norm(a) <= tol;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    converged = off_diagonal_norm(a) <= tol;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Jacobi iteration did not converge in " << max_sweeps << " sweeps";
    raise(Errc::NoConvergence, msg.str());
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SpectralData out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.eigenvalues[j] = a(src, src);
    Eigen::VectorXd col = v.col(src);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(col[k]) > 1e-12) {
        if (col[k] < 0.0) col = -col;
        break;
      }
    }
    out.eigenvectors.col(j) = col;
  }

  out.lambda_max = out.eigenvalues[0];
  const double zero_tol = kZeroEigenThreshold * std::abs(out.lambda_max);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (out.eigenvalues[j] < zero_tol) {
      ++out.zero_count;
    } else {
      out.lambda_min_plus = out.eigenvalues[j];
    }
  }
  return out;
}

double SqrtFactor::m1() const { return 1.0 / std::sqrt(lambda_min_plus); }

double SqrtFactor::m2() const { return std::sqrt(lambda_max); }

Eigen::VectorXd SqrtFactor::apply_blocks(const Eigen::MatrixXd& op, const Eigen::VectorXd& x) const {
  if (x.size() != op.cols() * dim) {
    raise(Errc::DimensionMismatch, "stacked vector does not match node count times dimension");
  }
  // Blocks are contiguous per node, so x viewed as a dim x N matrix has one node per column.
  Eigen::Map<const Eigen::MatrixXd> blocks(x.data(), dim, op.cols());
  Eigen::MatrixXd result = blocks * op.transpose();
  return Eigen::Map<const Eigen::VectorXd>(result.data(), result.size());
}

SqrtFactor sqrt_factor(const SpectralData& s, Eigen::Index dim) {
  if (dim < 1) raise(Errc::InvalidArgument, "message dimension must be >= 1");
  if (s.zero_count != 1) {
    std::ostringstream msg;
    msg << "expected exactly one zero eigenvalue, found " << s.zero_count;
    raise(Errc::RankDeficiency, msg.str());
  }
  const Eigen::Index n = s.eigenvalues.size();
  const Eigen::Index rank = n - 1;

  SqrtFactor f;
  f.dim = dim;
  f.lambda_max = s.lambda_max;
  f.lambda_min_plus = s.lambda_min_plus;
  f.abar.resize(rank, n);
  f.m_map.resize(rank, n);
  // Eigenvalues are sorted descending, so the zero eigenvalue is last.
  for (Eigen::Index j = 0; j < rank; ++j) {
    const double root = std::sqrt(s.eigenvalues[j]);
    f.abar.row(j) = root * s.eigenvectors.col(j).transpose();
    f.m_map.row(j) = s.eigenvectors.col(j).transpose() / root;
  }

  const Eigen::MatrixXd w = s.reconstruct();
  const double err = (f.abar.transpose() * f.abar - w).norm();
  if (err > 1e-9 * std::max(1.0, s.lambda_max) * static_cast<double>(n)) {
    std::ostringstream msg;
    msg << "square-root factor reproduces W only to " << err;
    raise(Errc::RankDeficiency, msg.str());
  }
  return f;
}

double image_residual(const Eigen::VectorXd& x, Eigen::Index nodes, Eigen::Index dim) {
  if (x.size() != nodes * dim) {
    raise(Errc::DimensionMismatch, "stacked vector does not match node count times dimension");
  }
  Eigen::Map<const Eigen::MatrixXd> blocks(x.data(), dim, nodes);
  const Eigen::VectorXd mean = blocks.rowwise().mean();
  return std::sqrt(static_cast<double>(nodes)) * mean.norm();
}

double m_norm(const Eigen::VectorXd& x, const SqrtFactor& f, double rel_tol) {
  const Eigen::Index nodes = f.m_map.cols();
  const double residual = image_residual(x, nodes, f.dim);
  if (residual > rel_tol * x.norm()) {
    std::ostringstream msg;
    msg << "vector has a component of norm " << residual << " outside Im(W (x) I)";
    raise(Errc::NotInImage, msg.str());
  }
  return f.apply_blocks(f.m_map, x).norm();
}

}  // namespace gridquant
