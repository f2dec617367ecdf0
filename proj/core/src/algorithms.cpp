#include "gridquant/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gridquant/error.hpp"

namespace gridquant {

namespace {

Eigen::VectorXd sum_blocks(const Eigen::VectorXd& c, std::size_t nodes, Eigen::Index d) {
  if (c.size() != static_cast<Eigen::Index>(nodes) * d) {
    raise(Errc::DimensionMismatch, "message vector does not have N blocks of length d");
  }
  Eigen::Map<const Eigen::MatrixXd> blocks(c.data(), d, static_cast<Eigen::Index>(nodes));
  return blocks.rowwise().sum();
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Gradient methods

DecentralizedGD::DecentralizedGD(std::shared_ptr<const Problem> problem, std::optional<double> step)
    : problem_(std::move(problem)) {
  if (!problem_) raise(Errc::InvalidArgument, "null problem");
  const double mu = problem_->local_strong_convexity();
  const double l = problem_->local_smoothness();
  const double n = static_cast<double>(problem_->node_count());
  const double d = static_cast<double>(problem_->dim());
  step_ = step ? *step : 2.0 / (n * (mu + l));
  if (!(step_ > 0.0)) raise(Errc::InvalidArgument, "step size must be positive");
  // |1 - step * lambda| over the spectrum [N mu, N L] of the summed Hessian.
  constants_.sigma = std::max(std::abs(1.0 - step_ * n * mu), std::abs(1.0 - step_ * n * l));
  constants_.lip_a = step_ * n * std::sqrt(d);
  constants_.lip_c = l;
}

Eigen::VectorXd DecentralizedGD::apply(const Eigen::VectorXd& c, const Eigen::VectorXd& x) const {
  return x - step_ * sum_blocks(c, node_count(), static_cast<Eigen::Index>(message_dim()));
}

Eigen::VectorXd DecentralizedGD::extract(std::size_t node, const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = problem_->local_grad(node, x);
  if (!g.allFinite()) raise(Errc::NonFiniteState, "gradient of node " + std::to_string(node));
  return g;
}

ProjectedDecentralizedGD::ProjectedDecentralizedGD(std::shared_ptr<const Problem> problem,
                                                   std::optional<double> step)
    : DecentralizedGD(problem, step ? step
                                    : std::optional<double>(
                                          1.0 / (static_cast<double>(problem->node_count()) *
                                                 problem->local_smoothness()))) {
  if (!step) constants_.sigma = std::sqrt(1.0 - 1.0 / kappa());
}

Eigen::VectorXd ProjectedDecentralizedGD::apply(const Eigen::VectorXd& c,
                                                const Eigen::VectorXd& x) const {
  return DecentralizedGD::apply(c, x).cwiseMax(0.0).cwiseMin(1.0);
}

std::optional<Eigen::VectorXd> ProjectedDecentralizedGD::fixed_point() const {
  auto z = problem_->minimizer();
  if (z && (z->array() >= 0.0).all() && (z->array() <= 1.0).all()) return z;
  return std::nullopt;
}

Eigen::VectorXd ProjectedDecentralizedGD::sample_state(std::mt19937_64& rng, double) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd x(static_cast<Eigen::Index>(state_dim()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = unit(rng);
  return x;
}

// ---------------------------------------------------------------------------------------------
// Dual decomposition

DualDecomposition::DualDecomposition(std::shared_ptr<const Problem> problem,
                                     const GraphSpec& graph, std::optional<double> step)
    : problem_(std::move(problem)) {
  if (!problem_) raise(Errc::InvalidArgument, "null problem");
  if (graph.node_count() != problem_->node_count()) {
    raise(Errc::DimensionMismatch, "graph and problem have different node counts");
  }
  if (graph.node_count() < 2) raise(Errc::InvalidGraph, "dual decomposition needs two or more nodes");
  laplacian_ = laplacian(graph);
  spectrum_ = eig_sym(laplacian_);
  factor_ = sqrt_factor(spectrum_, static_cast<Eigen::Index>(problem_->dim()));

  local_mu_ = problem_->local_strong_convexity();
  local_l_ = problem_->local_smoothness();
  const double lmax = spectrum_.lambda_max;
  const double lmin = spectrum_.lambda_min_plus;
  step_ = step ? *step : 2.0 * local_l_ * local_mu_ / (local_mu_ * lmin + local_l_ * lmax);
  kappa_w_ = lmax * local_l_ / (local_mu_ * lmin);

  // Gradient ascent on a dual that is (lmin / L)-strongly concave and (lmax / mu)-smooth.
  const double m_lo = lmin / local_l_;
  const double m_hi = lmax / local_mu_;
  constants_.sigma = std::max(std::abs(1.0 - step_ * m_lo), std::abs(1.0 - step_ * m_hi));
  const double n = static_cast<double>(problem_->node_count());
  const double d = static_cast<double>(problem_->dim());
  constants_.lip_a = step_ * std::sqrt(lmax * n * d);
  constants_.lip_c = std::sqrt(lmax) / local_mu_;

  if (auto z = problem_->minimizer()) {
    const auto dd = static_cast<Eigen::Index>(problem_->dim());
    Eigen::VectorXd x(static_cast<Eigen::Index>(state_dim()));
    for (std::size_t i = 0; i < problem_->node_count(); ++i) {
      x.segment(static_cast<Eigen::Index>(i) * dd, dd) = -problem_->local_grad(i, *z);
    }
    fixed_point_ = std::move(x);
  }
}

Eigen::VectorXd DualDecomposition::apply(const Eigen::VectorXd& c, const Eigen::VectorXd& x) const {
  const auto d = static_cast<Eigen::Index>(message_dim());
  const auto n = static_cast<Eigen::Index>(node_count());
  if (c.size() != n * d || x.size() != n * d) {
    raise(Errc::DimensionMismatch, "dual update expects N blocks of length d");
  }
  const double residual = image_residual(x, n, d);
  if (residual > 1e-8 * (x.norm() + step_ * spectrum_.lambda_max * c.norm())) {
    std::ostringstream msg;
    msg << "dual state has a component of norm " << residual << " outside Im(W (x) I)";
    raise(Errc::NotInImage, msg.str());
  }
  Eigen::Map<const Eigen::MatrixXd> cb(c.data(), d, n);
  Eigen::VectorXd out = x;
  Eigen::Map<Eigen::MatrixXd> ob(out.data(), d, n);
  ob.noalias() += step_ * cb * laplacian_;
  return out;
}

Eigen::VectorXd DualDecomposition::extract(std::size_t node, const Eigen::VectorXd& x) const {
  const auto d = static_cast<Eigen::Index>(message_dim());
  return solve_local_argmin(*problem_, node, x.segment(static_cast<Eigen::Index>(node) * d, d));
}

double DualDecomposition::norm(const Eigen::VectorXd& x) const {
  // Rows of M are orthogonal to the consensus directions, so rounding drift outside the
  // image does not contribute.
  return factor_.apply_blocks(factor_.m_map, x).norm();
}

Eigen::VectorXd DualDecomposition::sample_state(std::mt19937_64& rng, double scale) const {
  return tangent(AlgorithmModel::sample_state(rng, scale));
}

Eigen::VectorXd DualDecomposition::tangent(const Eigen::VectorXd& v) const {
  Eigen::VectorXd x = v;
  const auto d = static_cast<Eigen::Index>(message_dim());
  const auto n = static_cast<Eigen::Index>(node_count());
  Eigen::Map<Eigen::MatrixXd> blocks(x.data(), d, n);
  const Eigen::VectorXd mean = blocks.rowwise().mean();
  blocks.colwise() -= mean;
  return x;
}

double DualDecomposition::consensus_residual(const Eigen::VectorXd& c) const {
  const auto d = static_cast<Eigen::Index>(message_dim());
  const auto n = static_cast<Eigen::Index>(node_count());
  Eigen::Map<const Eigen::MatrixXd> cb(c.data(), d, n);
  return (cb * laplacian_).norm();
}

// ---------------------------------------------------------------------------------------------
// Inner solver

Eigen::VectorXd solve_local_argmin(const Problem& problem, std::size_t node,
                                   const Eigen::VectorXd& y, double tol, int max_iterations) {
  if (auto exact = problem.exact_local_argmin(node, y)) return *exact;

  auto objective = [&](const Eigen::VectorXd& c) { return problem.local_value(node, c) + c.dot(y); };
  const double lip = problem.local_smoothness();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(y.size());
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd g = problem.local_grad(node, c) + y;
    if (!g.allFinite()) raise(Errc::InnerSolverFailure, "non-finite inner gradient");
    if (g.norm() <= tol) return c;

    Eigen::VectorXd dir;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(problem.local_hessian(node, c));
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) dir = ldlt.solve(-g);
    const bool newton = dir.size() == g.size() && dir.allFinite() && g.dot(dir) < 0.0;
    if (!newton) dir = -g / lip;

    const double f0 = objective(c);
    const double slope = g.dot(dir);
    double t = 1.0;
    const bool blind = newton && -slope <= 1e-12 * (1.0 + std::abs(f0));
    while (!blind && objective(c + t * dir) > f0 + 1e-4 * t * slope && t > 1e-10) t *= 0.5;
    const Eigen::VectorXd next = c + t * dir;
    if (next == c) {
      // Line search stalled at rounding level; the gradient is as small as it gets.
      if (g.norm() <= 1e3 * tol) return c;
      break;
    }
    c = next;
  }
  std::ostringstream msg;
  msg << "inner minimization at node " << node << " did not reach gradient norm " << tol;
  raise(Errc::InnerSolverFailure, msg.str());
}

// ---------------------------------------------------------------------------------------------
// Lipschitz estimation

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

LipschitzEstimate estimate_lipschitz(const AlgorithmModel& model, std::size_t sample_count,
                                     std::uint64_t seed, double safety, double scale) {
  if (sample_count == 0) raise(Errc::EmptySample, "need at least one sample");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto nd = static_cast<Eigen::Index>(model.node_count() * model.message_dim());
  const auto d = static_cast<Eigen::Index>(model.message_dim());

  LipschitzEstimate best;
  for (std::size_t s = 0; s < sample_count; ++s) {
    // Condition on A: ||A(c1,x) - A(c2,x)|| / ||c1 - c2||_inf. For maps affine in c the
    // ratio is convex in the difference, so its maximum over the inf-ball sits at a sign
    // vector; greedy sign flips climb toward it.
    const Eigen::VectorXd x = model.sample_state(rng, scale);
    const Eigen::VectorXd c1 = Eigen::VectorXd::NullaryExpr(nd, [&] { return scale * gauss(rng); });
    Eigen::VectorXd delta(nd);
    for (Eigen::Index k = 0; k < nd; ++k) delta[k] = coin(rng) ? 1.0 : -1.0;
    const Eigen::VectorXd base = model.apply(c1, x);
    auto ratio_a = [&](const Eigen::VectorXd& dv) {
      return model.norm(model.apply(c1 + scale * dv, x) - base) / (scale * inf_norm(dv));
    };
    double current = ratio_a(delta);
    for (int pass = 0; pass < 2; ++pass) {
      bool improved = false;
      for (Eigen::Index k = 0; k < nd; ++k) {
        delta[k] = -delta[k];
        const double trial = ratio_a(delta);
        if (trial > current) {
          current = trial;
          improved = true;
        } else {
          delta[k] = -delta[k];
        }
      }
      if (!improved) break;
    }
    best.lip_a = std::max(best.lip_a, current);

    // Condition on C: ||C(x1) - C(x2)||_inf / ||x1 - x2||, random pair plus a step along
    // the finite-difference gradient of the component that moved most.
    const Eigen::VectorXd x1 = model.sample_state(rng, scale);
    const Eigen::VectorXd x2 = model.sample_state(rng, scale);
    const Eigen::VectorXd c_1 = model.extract_all(x1);
    const Eigen::VectorXd diff = model.extract_all(x2) - c_1;
    const double dist = model.norm(x2 - x1);
    if (dist > 0.0) best.lip_c = std::max(best.lip_c, inf_norm(diff) / dist);

    Eigen::Index j = 0;
    diff.cwiseAbs().maxCoeff(&j);
    const auto node = static_cast<std::size_t>(j / d);
    const Eigen::Index comp = j % d;
    const auto sd = static_cast<Eigen::Index>(model.state_dim());
    if (sd <= 4096) {
      const double h = 1e-5 * scale;
      Eigen::VectorXd grad(sd);
      for (Eigen::Index k = 0; k < sd; ++k) {
        Eigen::VectorXd xp = x1, xm = x1;
        xp[k] += h;
        xm[k] -= h;
        grad[k] = (model.extract(node, xp)[comp] - model.extract(node, xm)[comp]) / (2.0 * h);
      }
      grad = model.tangent(grad);
      if (grad.norm() > 0.0) {
        const Eigen::VectorXd u = scale * 1e-3 * grad / grad.norm();
        Eigen::VectorXd x3 = x1 + u;
        const double probe = model.norm(x3 - x1);
        if (probe > 0.0) {
          const double moved = inf_norm(model.extract_all(x3) - c_1);
          best.lip_c = std::max(best.lip_c, moved / probe);
        }
      }
    }
  }
  best.lip_a *= safety;
  best.lip_c *= safety;
  return best;
}

unsigned recommended_bits(double kappa, std::size_t dim, BitRule rule) {
  if (!(kappa >= 2.0)) {
    std::ostringstream msg;
    msg << "condition number " << kappa << " below 2";
    raise(Errc::KappaTooSmall, msg.str());
  }
  const double d = static_cast<double>(dim);
  const double arg = rule == BitRule::Unconstrained ? 24.0 * (kappa + 1.0) * std::sqrt(d)
                                                     : 16.0 * kappa * std::sqrt(2.0 * d);
  return static_cast<unsigned>(std::ceil(std::log2(arg)));
}

}  // namespace gridquant
