#include "gridquant/problems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <tuple>

#include "gridquant/error.hpp"

namespace gridquant {

double Problem::value(const Eigen::VectorXd& z) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < node_count(); ++i) sum += local_value(i, z);
  return sum;
}

Eigen::VectorXd Problem::grad(const Eigen::VectorXd& z) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < node_count(); ++i) sum += local_grad(i, z);
  return sum;
}

// ---------------------------------------------------------------------------------------------
// Quadratic

namespace {

std::pair<double, double> spectrum_bounds(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
  return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
}

}  // namespace

QuadraticProblem::QuadraticProblem(std::vector<Eigen::MatrixXd> hessians,
                                   std::vector<Eigen::VectorXd> linear)
    : hessians_(std::move(hessians)), linear_(std::move(linear)) {
  if (hessians_.empty() || hessians_.size() != linear_.size()) {
    raise(Errc::InvalidArgument, "need one Hessian and one linear term per node");
  }
  const Eigen::Index d = hessians_.front().rows();
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd total_linear = Eigen::VectorXd::Zero(d);
  local_mu_ = std::numeric_limits<double>::infinity();
  local_l_ = 0.0;
  for (std::size_t i = 0; i < hessians_.size(); ++i) {
    const auto& h = hessians_[i];
    if (h.rows() != d || h.cols() != d || linear_[i].size() != d) {
      raise(Errc::DimensionMismatch, "node " + std::to_string(i) + " has inconsistent dimensions");
    }
    if ((h - h.transpose()).norm() > 1e-12 * std::max(1.0, h.norm())) {
      raise(Errc::InvalidArgument, "Hessian of node " + std::to_string(i) + " is not symmetric");
    }
    const auto [lo, hi] = spectrum_bounds(h);
    if (!(lo > 0.0)) {
      raise(Errc::InvalidArgument, "Hessian of node " + std::to_string(i) + " is not positive definite");
    }
    local_mu_ = std::min(local_mu_, lo);
    local_l_ = std::max(local_l_, hi);
    factors_.emplace_back(h);
    total += h;
    total_linear += linear_[i];
  }
  std::tie(mu_, l_) = spectrum_bounds(total);
  minimizer_ = total.ldlt().solve(-total_linear);
}

double QuadraticProblem::local_value(std::size_t node, const Eigen::VectorXd& z) const {
  return 0.5 * z.dot(hessians_.at(node) * z) + linear_.at(node).dot(z);
}

Eigen::VectorXd QuadraticProblem::local_grad(std::size_t node, const Eigen::VectorXd& z) const {
  return hessians_.at(node) * z + linear_.at(node);
}

Eigen::MatrixXd QuadraticProblem::local_hessian(std::size_t node, const Eigen::VectorXd&) const {
  return hessians_.at(node);
}

std::optional<Eigen::VectorXd> QuadraticProblem::exact_local_argmin(std::size_t node,
                                                                    const Eigen::VectorXd& y) const {
  return Eigen::VectorXd(factors_.at(node).solve(-(linear_.at(node) + y)));
}

QuadraticProblem random_quadratic(std::size_t nodes, std::size_t dim, double mu, double l,
                                  std::uint64_t seed, double linear_scale) {
  if (nodes < 1 || dim < 1) raise(Errc::InvalidArgument, "need at least one node and one dimension");
  if (!(mu > 0.0 && l >= mu)) raise(Errc::InvalidArgument, "need 0 < mu <= L");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);

  std::vector<Eigen::MatrixXd> hessians;
  std::vector<Eigen::VectorXd> linear;
  for (std::size_t i = 0; i < nodes; ++i) {
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) g(r, c) = gauss(rng);
    const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd spectrum(d);
    for (Eigen::Index k = 0; k < d; ++k) spectrum[k] = mu + (l - mu) * unit(rng);
    spectrum[0] = mu;
    if (d > 1) spectrum[d - 1] = l;
    // scalar shards alternate so the local extremes are still mu and l
    if (d == 1 && i % 2 == 1) spectrum[0] = l;
    Eigen::MatrixXd h = basis * spectrum.asDiagonal() * basis.transpose();
    hessians.push_back(0.5 * (h + h.transpose()));

    Eigen::VectorXd b(d);
    for (Eigen::Index k = 0; k < d; ++k) b[k] = linear_scale * gauss(rng);
    linear.push_back(std::move(b));
  }
  return QuadraticProblem(std::move(hessians), std::move(linear));
}

// ---------------------------------------------------------------------------------------------
// Data

Dataset synthetic_dataset(std::size_t samples, std::size_t dim, std::uint64_t seed) {
  if (samples < 1 || dim < 1) raise(Errc::InvalidArgument, "need at least one sample and dimension");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(dim));
  out.labels.resize(static_cast<Eigen::Index>(samples));
  for (Eigen::Index i = 0; i < out.features.rows(); ++i) {
    const double y = coin(rng) ? 1.0 : -1.0;
    out.labels[i] = y;
    for (Eigen::Index j = 0; j < out.features.cols(); ++j) out.features(i, j) = y + gauss(rng);
  }
  return out;
}

namespace {

double parse_field(const std::string& field, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) ++used;
  if (used == 0 || used != field.size() || !std::isfinite(v)) {
    raise(Errc::ParseError, "line " + std::to_string(line_no) + ": bad number '" + field + "'");
  }
  return v;
}

}  // namespace

Dataset read_csv(std::istream& in) {
  std::vector<double> labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(parse_field(field, line_no));
    if (line.back() == ',') {
      raise(Errc::ParseError, "line " + std::to_string(line_no) + ": trailing comma");
    }
    if (fields.size() < 2) {
      raise(Errc::ParseError, "line " + std::to_string(line_no) + ": need a label and features");
    }
    if (fields[0] != 1.0 && fields[0] != -1.0) {
      raise(Errc::ParseError, "line " + std::to_string(line_no) + ": label must be -1 or 1");
    }
    if (dim == 0) {
      dim = fields.size() - 1;
    } else if (fields.size() - 1 != dim) {
      raise(Errc::DimensionMismatch, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(dim) + " features, got " +
                                         std::to_string(fields.size() - 1));
    }
    labels.push_back(fields[0]);
    rows.emplace_back(fields.begin() + 1, fields.end());
  }
  if (rows.empty()) raise(Errc::ParseError, "no data rows");

  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.labels[static_cast<Eigen::Index>(i)] = labels[i];
    for (std::size_t j = 0; j < dim; ++j) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::ParseError, "cannot open " + path.string());
  return read_csv(in);
}

// ---------------------------------------------------------------------------------------------
// Logistic regression

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

LogisticProblem::LogisticProblem(Dataset data, double rho, std::size_t nodes)
    : data_(std::move(data)), rho_(rho) {
  const std::size_t m = data_.size();
  if (!(rho_ > 0.0)) raise(Errc::InvalidArgument, "regularization rho must be positive");
  if (nodes < 1 || m < nodes) raise(Errc::InvalidArgument, "need at least one sample per node");
  if (data_.labels.size() != data_.features.rows()) {
    raise(Errc::DimensionMismatch, "label count differs from sample count");
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  const Eigen::VectorXd sq_norms = data_.features.rowwise().squaredNorm();
  curvature_ = 0.25 * sq_norms.sum() * inv_m;
  for (std::size_t i = 0; i < nodes; ++i) {
    Shard s;
    s.begin = static_cast<Eigen::Index>(i * m / nodes);
    s.end = static_cast<Eigen::Index>((i + 1) * m / nodes);
    s.curvature = 0.25 * sq_norms.segment(s.begin, s.end - s.begin).sum() * inv_m;
    shards_.push_back(s);
  }

  // Newton with backtracking on the full objective.
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd g = grad(z);
    if (g.norm() <= 1e-13) break;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(z.size(), z.size());
    for (std::size_t i = 0; i < nodes; ++i) h += local_hessian(i, z);
    const Eigen::VectorXd step = h.ldlt().solve(-g);
    const double f0 = value(z);
    double t = 1.0;
    // Once the Newton decrement is below rounding in f the line search is blind; take
    // the full step, which is in the quadratic convergence region by then.
    const bool blind = -g.dot(step) <= 1e-12 * (1.0 + std::abs(f0));
    while (!blind && t > 1e-12 && value(z + t * step) > f0 + 1e-4 * t * g.dot(step)) t *= 0.5;
    z += t * step;
    if (t * step.norm() <= 1e-16 * std::max(1.0, z.norm())) break;
  }
  if (grad(z).norm() > 1e-10) {
    raise(Errc::InnerSolverFailure, "Newton's method did not reach the logistic minimizer");
  }
  minimizer_ = std::move(z);
}

double LogisticProblem::local_value(std::size_t node, const Eigen::VectorXd& z) const {
  const Shard& s = shards_.at(node);
  const double inv_m = 1.0 / static_cast<double>(data_.size());
  const Eigen::VectorXd margins = data_.features.middleRows(s.begin, s.end - s.begin) * z;
  double loss = 0.0;
  for (Eigen::Index j = 0; j < margins.size(); ++j) {
    loss += softplus(-data_.labels[s.begin + j] * margins[j]);
  }
  const double nodes = static_cast<double>(shards_.size());
  return loss * inv_m + 0.5 * rho_ / nodes * z.squaredNorm();
}

Eigen::VectorXd LogisticProblem::local_grad(std::size_t node, const Eigen::VectorXd& z) const {
  const Shard& s = shards_.at(node);
  const double inv_m = 1.0 / static_cast<double>(data_.size());
  const auto rows = data_.features.middleRows(s.begin, s.end - s.begin);
  const Eigen::VectorXd margins = rows * z;
  Eigen::VectorXd weights(margins.size());
  for (Eigen::Index j = 0; j < margins.size(); ++j) {
    const double y = data_.labels[s.begin + j];
    weights[j] = -y * sigmoid(-y * margins[j]);
  }
  const double nodes = static_cast<double>(shards_.size());
  return inv_m * (rows.transpose() * weights) + rho_ / nodes * z;
}

Eigen::MatrixXd LogisticProblem::local_hessian(std::size_t node, const Eigen::VectorXd& z) const {
  const Shard& s = shards_.at(node);
  const double inv_m = 1.0 / static_cast<double>(data_.size());
  const auto rows = data_.features.middleRows(s.begin, s.end - s.begin);
  const Eigen::VectorXd margins = rows * z;
  Eigen::VectorXd weights(margins.size());
  for (Eigen::Index j = 0; j < margins.size(); ++j) {
    const double p = sigmoid(margins[j]);
    weights[j] = p * (1.0 - p);
  }
  const double nodes = static_cast<double>(shards_.size());
  Eigen::MatrixXd h = inv_m * (rows.transpose() * weights.asDiagonal() * rows);
  h.diagonal().array() += rho_ / nodes;
  return h;
}

double LogisticProblem::local_strong_convexity() const {
  return rho_ / static_cast<double>(shards_.size());
}

double LogisticProblem::local_smoothness() const {
  double worst = 0.0;
  for (const auto& s : shards_) worst = std::max(worst, s.curvature);
  return rho_ / static_cast<double>(shards_.size()) + worst;
}

double bound_D(const Problem& problem, const Eigen::VectorXd& x0) {
  const double f0 = problem.value(x0);
  if (f0 < 0.0) raise(Errc::NegativeObjective, "objective is negative at the starting point");
  if (auto z = problem.minimizer(); z && problem.value(*z) < 0.0) {
    raise(Errc::NegativeObjective, "objective is negative at its minimizer");
  }
  return std::sqrt(2.0 / problem.strong_convexity() * f0);
}

double optimality_gap_bound(const Problem& problem, const Eigen::VectorXd& x0) {
  const auto z = problem.minimizer();
  if (!z) raise(Errc::InvalidArgument, "optimality gap bound needs a known minimizer");
  const double gap = std::max(problem.value(x0) - problem.value(*z), 0.0);
  return std::sqrt(2.0 / problem.strong_convexity() * gap);
}

}  // namespace gridquant
