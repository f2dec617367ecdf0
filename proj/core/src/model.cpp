#include "gridquant/model.hpp"

namespace gridquant {

Eigen::VectorXd AlgorithmModel::sample_state(std::mt19937_64& rng, double scale) const {
  std::normal_distribution<double> gauss(0.0, scale);
  Eigen::VectorXd x(static_cast<Eigen::Index>(state_dim()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = gauss(rng);
  return x;
}

Eigen::VectorXd AlgorithmModel::extract_all(const Eigen::VectorXd& x) const {
  const auto d = static_cast<Eigen::Index>(message_dim());
  Eigen::VectorXd c(static_cast<Eigen::Index>(node_count()) * d);
  for (std::size_t i = 0; i < node_count(); ++i) {
    c.segment(static_cast<Eigen::Index>(i) * d, d) = extract(i, x);
  }
  return c;
}

}  // namespace gridquant
