#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace gridquant {

/// F(z) = sum_i f_i(z) split across node_count() nodes, each f_i strongly convex and smooth.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t node_count() const = 0;
  virtual std::size_t dim() const = 0;

  virtual double local_value(std::size_t node, const Eigen::VectorXd& z) const = 0;
  virtual Eigen::VectorXd local_grad(std::size_t node, const Eigen::VectorXd& z) const = 0;
  virtual Eigen::MatrixXd local_hessian(std::size_t node, const Eigen::VectorXd& z) const = 0;

  /// min_i mu_i and max_i L_i over the local functions.
  virtual double local_strong_convexity() const = 0;
  virtual double local_smoothness() const = 0;
  /// Constants of the sum F.
  virtual double strong_convexity() const = 0;
  virtual double smoothness() const = 0;

  virtual std::optional<Eigen::VectorXd> minimizer() const = 0;

  /// argmin_c f_i(c) + <c, y> when available in closed form.
  virtual std::optional<Eigen::VectorXd> exact_local_argmin(std::size_t, const Eigen::VectorXd&) const {
    return std::nullopt;
  }

  double value(const Eigen::VectorXd& z) const;
  Eigen::VectorXd grad(const Eigen::VectorXd& z) const;
};

/// f_i(z) = 0.5 z^T H_i z + g_i^T z with symmetric positive definite H_i.
class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(std::vector<Eigen::MatrixXd> hessians, std::vector<Eigen::VectorXd> linear);

  std::size_t node_count() const override { return hessians_.size(); }
  std::size_t dim() const override { return static_cast<std::size_t>(hessians_.front().rows()); }

  double local_value(std::size_t node, const Eigen::VectorXd& z) const override;
  Eigen::VectorXd local_grad(std::size_t node, const Eigen::VectorXd& z) const override;
  Eigen::MatrixXd local_hessian(std::size_t node, const Eigen::VectorXd& z) const override;

  double local_strong_convexity() const override { return local_mu_; }
  double local_smoothness() const override { return local_l_; }
  double strong_convexity() const override { return mu_; }
  double smoothness() const override { return l_; }

  std::optional<Eigen::VectorXd> minimizer() const override { return minimizer_; }
  std::optional<Eigen::VectorXd> exact_local_argmin(std::size_t node,
                                                    const Eigen::VectorXd& y) const override;

  const Eigen::MatrixXd& hessian(std::size_t node) const { return hessians_.at(node); }
  const Eigen::VectorXd& linear(std::size_t node) const { return linear_.at(node); }

 private:
  std::vector<Eigen::MatrixXd> hessians_;
  std::vector<Eigen::VectorXd> linear_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
  double local_mu_ = 0.0, local_l_ = 0.0, mu_ = 0.0, l_ = 0.0;
  Eigen::VectorXd minimizer_;
};

/// Random quadratic with every local Hessian spectrum inside [mu, l] and Gaussian linear
/// terms of the given scale. Both endpoints are attained locally when dim >= 2 or nodes >= 2.
QuadraticProblem random_quadratic(std::size_t nodes, std::size_t dim, double mu, double l,
                                  std::uint64_t seed, double linear_scale = 1.0);

/// Labeled samples: one feature row per sample, labels in {-1, +1}.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
};

/// y = +1 with v = 1 + n or y = -1 with v = -1 + n, each with probability 1/2; n ~ N(0, I).
Dataset synthetic_dataset(std::size_t samples, std::size_t dim, std::uint64_t seed);

/// Rows "y,v_1,...,v_d". Throws Errc::ParseError / Errc::DimensionMismatch with the line.
Dataset read_csv(std::istream& in);
Dataset load_csv(const std::filesystem::path& path);

/// F(z) = (1/m) sum log(1 + exp(-y z^T v)) + (rho/2)||z||^2.
///
/// Node i owns a contiguous shard of samples. Its local function divides by the global m
/// and carries rho/(2N) of the regularizer, so the local functions sum to F exactly.
class LogisticProblem final : public Problem {
 public:
  LogisticProblem(Dataset data, double rho, std::size_t nodes);

  std::size_t node_count() const override { return shards_.size(); }
  std::size_t dim() const override { return data_.dim(); }

  double local_value(std::size_t node, const Eigen::VectorXd& z) const override;
  Eigen::VectorXd local_grad(std::size_t node, const Eigen::VectorXd& z) const override;
  Eigen::MatrixXd local_hessian(std::size_t node, const Eigen::VectorXd& z) const override;

  double local_strong_convexity() const override;
  double local_smoothness() const override;
  /// rho.
  double strong_convexity() const override { return rho_; }
  /// rho + V with V = (1/m) sum ||v_j||^2 / 4.
  double smoothness() const override { return rho_ + curvature_; }

  /// Newton's method on F to a gradient norm of 1e-13.
  std::optional<Eigen::VectorXd> minimizer() const override { return minimizer_; }

  double rho() const { return rho_; }
  const Dataset& data() const { return data_; }

 private:
  struct Shard {
    Eigen::Index begin = 0, end = 0;
    double curvature = 0.0;  // (1/m) sum over the shard of ||v_j||^2 / 4
  };

  Dataset data_;
  double rho_;
  double curvature_ = 0.0;
  std::vector<Shard> shards_;
  Eigen::VectorXd minimizer_;
};

/// D = sqrt((2/mu) F(x0)) with mu the strong convexity of F; needs F >= 0. Throws
/// Errc::NegativeObjective when F(x0) < 0 or the known minimum is negative.
double bound_D(const Problem& problem, const Eigen::VectorXd& x0);

/// D = sqrt((2/mu) (F(x0) - F*)) using the known minimizer; no sign condition on F.
double optimality_gap_bound(const Problem& problem, const Eigen::VectorXd& x0);

}  // namespace gridquant
