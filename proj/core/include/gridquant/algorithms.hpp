#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "gridquant/graph.hpp"
#include "gridquant/model.hpp"
#include "gridquant/problems.hpp"
#include "gridquant/spectral.hpp"

namespace gridquant {

/// Master/worker gradient method: x+ = x - step * sum_i c_i, c_i = grad f_i(x).
///
/// With every f_i mu-strongly convex and L-smooth, the default step 2 / (N (mu + L))
/// gives sigma = 1 - 2/(kappa + 1), kappa = L / mu, in the 2-norm.
/// L_A = step * N * sqrt(d) and L_C = L.
class DecentralizedGD : public AlgorithmModel {
 public:
  explicit DecentralizedGD(std::shared_ptr<const Problem> problem,
                           std::optional<double> step = std::nullopt);

  std::size_t node_count() const override { return problem_->node_count(); }
  std::size_t message_dim() const override { return problem_->dim(); }
  std::size_t state_dim() const override { return problem_->dim(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& c, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd extract(std::size_t node, const Eigen::VectorXd& x) const override;
  double norm(const Eigen::VectorXd& x) const override { return x.norm(); }
  ModelConstants constants() const override { return constants_; }
  std::optional<Eigen::VectorXd> fixed_point() const override { return problem_->minimizer(); }
  std::optional<double> objective(const Eigen::VectorXd& x) const override {
    return problem_->value(x);
  }

  double step_size() const { return step_; }
  /// L / mu of the local functions.
  double kappa() const { return problem_->local_smoothness() / problem_->local_strong_convexity(); }
  const Problem& problem() const { return *problem_; }

  /// Replaces the Lipschitz constants, e.g. with sampled estimates.
  void override_constants(const ModelConstants& mc) { constants_ = mc; }

 protected:
  std::shared_ptr<const Problem> problem_;
  double step_;
  ModelConstants constants_;
};

/// Gradient method projected onto the box [0, 1]^d. Default step 1 / (N L),
/// sigma = sqrt(1 - 1/kappa).
class ProjectedDecentralizedGD final : public DecentralizedGD {
 public:
  explicit ProjectedDecentralizedGD(std::shared_ptr<const Problem> problem,
                                    std::optional<double> step = std::nullopt);

  Eigen::VectorXd apply(const Eigen::VectorXd& c, const Eigen::VectorXd& x) const override;
  /// The unconstrained minimizer when it lies inside the box, otherwise unknown.
  std::optional<Eigen::VectorXd> fixed_point() const override;
  Eigen::VectorXd sample_state(std::mt19937_64& rng, double scale) const override;

  /// Diameter of the box, sqrt(d).
  double box_diameter() const { return std::sqrt(static_cast<double>(state_dim())); }
};

/// Dual decomposition over a connected graph. The state stacks the dual variables x_i of
/// all nodes and lives in Im(W (x) I_d); messages are the primal minimizers
/// c_i = argmin f_i(c) + <c, x_i>.
///
/// step = 2 L mu / (mu lambda_min+ + L lambda_max), sigma = 1 - 2/(kappa_W + 1) with
/// kappa_W = lambda_max L / (mu lambda_min+), contraction measured in ||M x||_2.
/// Lipschitz constants: L_A = step * sqrt(lambda_max N d), L_C = sqrt(lambda_max) / mu.
class DualDecomposition final : public AlgorithmModel {
 public:
  DualDecomposition(std::shared_ptr<const Problem> problem, const GraphSpec& graph,
                    std::optional<double> step = std::nullopt);

  std::size_t node_count() const override { return problem_->node_count(); }
  std::size_t message_dim() const override { return problem_->dim(); }
  std::size_t state_dim() const override { return problem_->node_count() * problem_->dim(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& c, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd extract(std::size_t node, const Eigen::VectorXd& x) const override;
  double norm(const Eigen::VectorXd& x) const override;
  ModelConstants constants() const override { return constants_; }
  std::optional<Eigen::VectorXd> fixed_point() const override { return fixed_point_; }
  Eigen::VectorXd sample_state(std::mt19937_64& rng, double scale) const override;
  /// Removes the consensus component, leaving a vector of Im(W (x) I).
  Eigen::VectorXd tangent(const Eigen::VectorXd& v) const override;

  double step_size() const { return step_; }
  double kappa_w() const { return kappa_w_; }
  const SpectralData& spectrum() const { return spectrum_; }
  const SqrtFactor& factor() const { return factor_; }
  const Eigen::MatrixXd& laplacian_matrix() const { return laplacian_; }
  const Problem& problem() const { return *problem_; }

  /// ||(W (x) I) c||_2, zero exactly at consensus.
  double consensus_residual(const Eigen::VectorXd& c) const;

  void override_constants(const ModelConstants& mc) { constants_ = mc; }

 private:
  std::shared_ptr<const Problem> problem_;
  Eigen::MatrixXd laplacian_;
  SpectralData spectrum_;
  SqrtFactor factor_;
  double step_;
  double kappa_w_;
  double local_mu_, local_l_;
  ModelConstants constants_;
  std::optional<Eigen::VectorXd> fixed_point_;
};

/// argmin_c f_i(c) + <c, y>: closed form when the problem offers one, otherwise damped
/// Newton with a gradient-step fallback to an inner gradient norm of tol.
Eigen::VectorXd solve_local_argmin(const Problem& problem, std::size_t node,
                                   const Eigen::VectorXd& y, double tol = 1e-10,
                                   int max_iterations = 200);

struct LipschitzEstimate {
  double lip_a = 0.0;
  double lip_c = 0.0;
};

/// Largest observed ratios for the two Lipschitz conditions over random state/message
/// pairs, multiplied by safety. Throws Errc::EmptySample when sample_count is zero.
LipschitzEstimate estimate_lipschitz(const AlgorithmModel& model, std::size_t sample_count,
                                     std::uint64_t seed, double safety = 2.0, double scale = 1.0);

enum class BitRule {
  Unconstrained,  ///< ceil(log2(24 (kappa + 1) sqrt(d)))
  Box,            ///< ceil(log2(16 kappa sqrt(2 d)))
};

/// Bit width that keeps 1/(1 - alpha) within a constant multiple of kappa.
/// Throws Errc::KappaTooSmall when kappa < 2.
unsigned recommended_bits(double kappa, std::size_t dim, BitRule rule = BitRule::Unconstrained);

}  // namespace gridquant
