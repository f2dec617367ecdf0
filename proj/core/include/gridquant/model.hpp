#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Dense>

namespace gridquant {

/// Contraction factor and Lipschitz constants of an (A, C) pair.
struct ModelConstants {
  double sigma = 0.0;  ///< pseudo-contraction factor of x -> A(C(x), x)
  double lip_a = 0.0;  ///< ||A(c1,x) - A(c2,x)|| <= lip_a ||c1 - c2||_inf
  double lip_c = 0.0;  ///< ||C(x1) - C(x2)||_inf <= lip_c ||x1 - x2||
};

/// An iteration x+ = A(c, x), c_i = C_i(x) that contracts toward a fixed point
/// at rate sigma in norm().
///
/// The communication vector c stacks node_count() blocks of message_dim() entries.
class AlgorithmModel {
 public:
  virtual ~AlgorithmModel() = default;

  virtual std::size_t node_count() const = 0;
  virtual std::size_t message_dim() const = 0;
  virtual std::size_t state_dim() const = 0;

  virtual Eigen::VectorXd apply(const Eigen::VectorXd& c, const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd extract(std::size_t node, const Eigen::VectorXd& x) const = 0;
  virtual double norm(const Eigen::VectorXd& x) const = 0;

  virtual ModelConstants constants() const = 0;
  virtual std::optional<Eigen::VectorXd> fixed_point() const { return std::nullopt; }

  /// Default starting state.
  virtual Eigen::VectorXd initial_state() const { return Eigen::VectorXd::Zero(state_dim()); }

  /// A random state of the model's domain, used by Lipschitz estimation.
  virtual Eigen::VectorXd sample_state(std::mt19937_64& rng, double scale) const;

  /// Projects a state difference onto the directions the iteration can move in.
  virtual Eigen::VectorXd tangent(const Eigen::VectorXd& v) const { return v; }

  /// Objective value associated with a state, when the model has one.
  virtual std::optional<double> objective(const Eigen::VectorXd&) const { return std::nullopt; }

  /// Stacks C_i(x) for every node.
  Eigen::VectorXd extract_all(const Eigen::VectorXd& x) const;

  /// One unquantized step x -> A(C(x), x).
  Eigen::VectorXd step(const Eigen::VectorXd& x) const { return apply(extract_all(x), x); }
};

}  // namespace gridquant
