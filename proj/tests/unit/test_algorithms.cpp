#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include <gridquant/algorithms.hpp>
#include <gridquant/graph.hpp>
#include <gridquant/runner.hpp>

#include "test_support.hpp"

using namespace gridquant;
using testsupport::code_of;
using testsupport::vec;

namespace {

std::shared_ptr<QuadraticProblem> scalar_half_square(std::size_t nodes) {
  std::vector<Eigen::MatrixXd> h(nodes, Eigen::MatrixXd::Identity(1, 1));
  std::vector<Eigen::VectorXd> g(nodes, Eigen::VectorXd::Zero(1));
  return std::make_shared<QuadraticProblem>(h, g);
}

std::shared_ptr<QuadraticProblem> quad(std::size_t n, std::size_t d, double mu, double l,
                                       std::uint64_t seed) {
  return std::make_shared<QuadraticProblem>(random_quadratic(n, d, mu, l, seed));
}

// Largest Euclidean row norm over all local Hessians: sup ||H_i u||_inf / ||u||_2.
double max_row_norm(const QuadraticProblem& q) {
  double best = 0.0;
  for (std::size_t i = 0; i < q.node_count(); ++i) {
    best = std::max(best, q.hessian(i).rowwise().norm().maxCoeff());
  }
  return best;
}

}  // namespace

TEST_SUITE("algorithms") {
  TEST_CASE("gd apply") {
    const DecentralizedGD gd(scalar_half_square(2), 0.25);
    CHECK(gd.apply(vec({1.0, 1.0}), vec({1.0}))[0] == 0.5);
    CHECK(gd.apply(vec({0.0, 0.0}), vec({0.7}))[0] == 0.7);
    CHECK(code_of([&] { gd.apply(vec({1.0}), vec({1.0})); }) == Errc::DimensionMismatch);

    const auto q = quad(4, 3, 1.0, 5.0, 1);
    const DecentralizedGD model(q);
    const Eigen::VectorXd x_star = *q->minimizer();
    CHECK((model.step(x_star) - x_star).norm() <= 1e-12);
  }

  TEST_CASE("gd extract is the local gradient") {
    const auto q = quad(3, 4, 1.0, 7.0, 2);
    const DecentralizedGD gd(q);
    const Eigen::VectorXd z = vec({0.1, -0.4, 2.0, 1.0});
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK((gd.extract(i, z) - (q->hessian(i) * z + q->linear(i))).norm() <= 1e-12);
    }
  }

  TEST_CASE("gd constants") {
    // N = 20, d = 1, mu = 1, L = 3
    const auto q = quad(20, 1, 1.0, 3.0, 3);
    const DecentralizedGD gd(q);
    REQUIRE(q->local_strong_convexity() == doctest::Approx(1.0));
    REQUIRE(q->local_smoothness() == doctest::Approx(3.0));
    CHECK(gd.step_size() == doctest::Approx(2.0 / (20.0 * 4.0)));
    CHECK(gd.constants().lip_a == doctest::Approx(0.5));
    CHECK(gd.constants().lip_c == doctest::Approx(3.0));
    CHECK(gd.constants().sigma == doctest::Approx(0.5));
  }

  TEST_CASE("gd per-step contraction") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd(0.0, 3.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto q = quad(2 + seed, 1 + 3 * seed, 0.5 + seed, 4.0 + 5.0 * seed, 100 + seed);
      const DecentralizedGD gd(q);
      const double kappa = q->local_smoothness() / q->local_strong_convexity();
      const double sigma = 1.0 - 2.0 / (kappa + 1.0);
      CHECK(gd.constants().sigma == doctest::Approx(sigma));
      const Eigen::VectorXd x_star = *q->minimizer();
      for (int t = 0; t < 50; ++t) {
        const Eigen::VectorXd x =
            x_star + Eigen::VectorXd::NullaryExpr(x_star.size(), [&] { return nd(rng); });
        const double ratio = (gd.step(x) - x_star).norm() / (x - x_star).norm();
        CHECK(ratio <= sigma + 1e-9);
      }
    }
  }

  TEST_CASE("projected gd") {
    const auto q = quad(3, 4, 1.0, 6.0, 5);
    const ProjectedDecentralizedGD pgd(q);
    CHECK(pgd.step_size() == doctest::Approx(1.0 / (3.0 * q->local_smoothness())));
    const double kappa = q->local_smoothness() / q->local_strong_convexity();
    CHECK(pgd.constants().sigma == doctest::Approx(std::sqrt(1.0 - 1.0 / kappa)));
    CHECK(pgd.box_diameter() == doctest::Approx(2.0));

    const DecentralizedGD plain(q, pgd.step_size());
    const Eigen::VectorXd mid = Eigen::VectorXd::Constant(4, 0.5);
    const Eigen::VectorXd small_c = Eigen::VectorXd::Constant(12, 0.01);
    CHECK((pgd.apply(small_c, mid) - plain.apply(small_c, mid)).norm() == 0.0);

    const Eigen::VectorXd big_c = Eigen::VectorXd::Constant(12, 1e3);
    CHECK(pgd.apply(big_c, mid) == Eigen::VectorXd::Zero(4));
    CHECK(pgd.apply(-big_c, mid) == Eigen::VectorXd::Ones(4));
    // binding coordinates stay at 0
    Eigen::VectorXd c = Eigen::VectorXd::Zero(12);
    c[0] = 5.0;
    CHECK(pgd.apply(c, Eigen::VectorXd::Zero(4))[0] == 0.0);

    std::mt19937_64 rng(6);
    Eigen::VectorXd x = pgd.sample_state(rng, 1.0);
    for (int k = 0; k < 200; ++k) {
      x = pgd.step(x);
      CHECK((x.array() >= 0.0).all());
      CHECK((x.array() <= 1.0).all());
    }
  }

  TEST_CASE("dual apply") {
    const auto p = scalar_half_square(2);
    const DualDecomposition unit_step(p, GraphSpec::path(2), 1.0);
    const Eigen::VectorXd out = unit_step.apply(vec({1.0, 0.0}), vec({0.0, 0.0}));
    CHECK(out[0] == 1.0);
    CHECK(out[1] == -1.0);
    CHECK(unit_step.apply(vec({0.3, 0.3}), vec({0.5, -0.5})) == vec({0.5, -0.5}));
    CHECK(code_of([&] { unit_step.apply(vec({0.0, 0.0}), vec({1.0, 1.0})); }) == Errc::NotInImage);

    const DualDecomposition frozen(p, GraphSpec::path(2), 0.0);
    CHECK(frozen.apply(vec({4.0, -2.0}), vec({0.25, -0.25})) == vec({0.25, -0.25}));
  }

  TEST_CASE("dual extract") {
    const auto p = scalar_half_square(3);
    const DualDecomposition dual(p, GraphSpec::complete(3));
    CHECK(dual.extract(1, vec({0.0, 2.5, -2.5}))[0] == doctest::Approx(-2.5));

    const auto q = quad(3, 4, 1.0, 8.0, 7);
    const DualDecomposition dq(q, GraphSpec::path(3));
    const Eigen::VectorXd v = vec({1.0, -2.0, 0.5, 3.0});
    Eigen::VectorXd x = Eigen::VectorXd::Zero(12);
    x.segment(4, 4) = v;
    const Eigen::VectorXd expect = q->hessian(1).ldlt().solve(-v - q->linear(1));
    CHECK((dq.extract(1, x) - expect).norm() <= 1e-10);
  }

  TEST_CASE("inner solver on logistic shards") {
    const auto lp = std::make_shared<LogisticProblem>(synthetic_dataset(400, 5, 8), 0.5, 4);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd(0.0, 0.2);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(5, [&] { return nd(rng); });
      for (std::size_t i = 0; i < 4; ++i) {
        const Eigen::VectorXd c = solve_local_argmin(*lp, i, y);
        CHECK((lp->local_grad(i, c) + y).norm() <= 1e-10);
        // finite difference of the inner objective vanishes
        for (Eigen::Index j = 0; j < 5; ++j) {
          Eigen::VectorXd a = c, b = c;
          const double h = 1e-4;
          a[j] += h;
          b[j] -= h;
          const double fd = (lp->local_value(i, a) + a.dot(y) - lp->local_value(i, b) - b.dot(y)) / (2 * h);
          CHECK(std::abs(fd) <= 1e-7);
        }
      }
    }
    CHECK(code_of([&] { solve_local_argmin(*lp, 0, vec({1, 1, 1, 1, 1}), 1e-10, 0); }) ==
          Errc::InnerSolverFailure);
  }

  TEST_CASE("dual constants") {
    const auto q = quad(5, 2, 1.0, 4.0, 10);
    const GraphSpec g = GraphSpec::path(5);
    const DualDecomposition dual(q, g);
    const double lmax = dual.spectrum().lambda_max, lmin = dual.spectrum().lambda_min_plus;
    const double mu = q->local_strong_convexity(), l = q->local_smoothness();
    CHECK(dual.step_size() == doctest::Approx(2 * l * mu / (mu * lmin + l * lmax)));
    CHECK(dual.kappa_w() == doctest::Approx(lmax * l / (mu * lmin)));
    CHECK(dual.constants().sigma == doctest::Approx(1.0 - 2.0 / (dual.kappa_w() + 1.0)));
    CHECK(dual.constants().lip_a == doctest::Approx(dual.step_size() * std::sqrt(lmax * 5 * 2)));
    CHECK(dual.constants().lip_c == doctest::Approx(std::sqrt(lmax) / mu));
  }

  TEST_CASE("dual per-step contraction in the M-norm") {
    std::mt19937_64 rng(11);
    const std::vector<GraphSpec> graphs{GraphSpec::path(2), GraphSpec::complete(3),
                                        random_geometric_graph(20, 0.3, 2024)};
    for (const auto& g : graphs) {
      const auto q = quad(g.node_count(), 3, 1.0, 6.0, 20 + g.node_count());
      const DualDecomposition dual(q, g);
      const Eigen::VectorXd x_star = *dual.fixed_point();
      const double sigma = dual.constants().sigma;
      for (int t = 0; t < 30; ++t) {
        const Eigen::VectorXd x = x_star + dual.sample_state(rng, 2.0);
        const double ratio = dual.norm(dual.step(x) - x_star) / dual.norm(x - x_star);
        CHECK(ratio <= sigma + 1e-9);
      }
    }
  }

  TEST_CASE("dual converges to consensus at the primal optimum") {
    const auto q = quad(6, 2, 1.0, 3.0, 12);
    const DualDecomposition dual(q, random_geometric_graph(6, 0.7, 1));
    const RunTrace t = run_exact(dual, dual.initial_state(), 600);
    Eigen::VectorXd x = dual.initial_state();
    for (int k = 0; k < 600; ++k) x = dual.step(x);
    const Eigen::VectorXd c = dual.extract_all(x);
    for (int i = 1; i < 6; ++i) CHECK((c.segment(2 * i, 2) - c.head(2)).norm() <= 1e-6);
    CHECK(q->grad(c.head(2)).norm() <= 1e-6);
    CHECK(dual.consensus_residual(c) <= 1e-6);
    CHECK(t.last().err.value() <= 1e-8);
  }

  TEST_CASE("dual curvature lies in the predicted band") {
    // psi(lambda) = sum_i min_c f_i(c) + <c, (abar^T lambda)_i>; its gradient is abar c.
    const auto q = quad(7, 2, 0.5, 4.0, 13);
    const DualDecomposition dual(q, random_geometric_graph(7, 0.6, 5));
    const SqrtFactor& f = dual.factor();
    const Eigen::MatrixXd at = f.abar.transpose();
    auto grad = [&](const Eigen::VectorXd& lambda) {
      return f.apply_blocks(f.abar, dual.extract_all(f.apply_blocks(at, lambda)));
    };
    const double lo = dual.spectrum().lambda_min_plus / q->local_smoothness();
    const double hi = dual.spectrum().lambda_max / q->local_strong_convexity();
    std::mt19937_64 rng(14);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
      const Eigen::VectorXd lambda = Eigen::VectorXd::NullaryExpr(12, [&] { return nd(rng); });
      const Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(12, [&] { return nd(rng); });
      const double curv = -(grad(lambda + u) - grad(lambda)).dot(u) / u.squaredNorm();
      CHECK(curv >= lo * (1 - 1e-9));
      CHECK(curv <= hi * (1 + 1e-9));
    }
  }

  TEST_CASE("lipschitz estimation for gd") {
    const auto q = quad(6, 5, 1.0, 9.0, 15);
    const DecentralizedGD gd(q);
    const double la = gd.step_size() * 6.0 * std::sqrt(5.0);
    const LipschitzEstimate raw = estimate_lipschitz(gd, 200, 1, 1.0);
    CHECK(raw.lip_a <= la * (1 + 1e-12));
    const LipschitzEstimate est = estimate_lipschitz(gd, 200, 1);
    CHECK(est.lip_a >= la * (1 - 1e-12));
    CHECK(est.lip_a <= 2.0 * la * (1 + 1e-12));
    const double row = max_row_norm(*q);
    CHECK(raw.lip_c <= row * (1 + 1e-6));
    CHECK(est.lip_c >= row);
    CHECK(est.lip_c <= 2.0 * q->local_smoothness());
    CHECK(code_of([&] { estimate_lipschitz(gd, 0, 1); }) == Errc::EmptySample);
  }

  TEST_CASE("lipschitz estimation for dual stays under the analytic bounds") {
    const auto q = quad(8, 3, 1.0, 5.0, 16);
    const DualDecomposition dual(q, random_geometric_graph(8, 0.6, 7));
    const LipschitzEstimate raw = estimate_lipschitz(dual, 100, 2, 1.0);
    CHECK(raw.lip_a > 0.0);
    CHECK(raw.lip_a <= dual.constants().lip_a * (1 + 1e-9));
    CHECK(raw.lip_c > 0.0);
    CHECK(raw.lip_c <= dual.constants().lip_c * (1 + 1e-6));
  }

  TEST_CASE("recommended bits") {
    CHECK(recommended_bits(2.0, 1) == 7);
    CHECK(recommended_bits(3.0, 4) == 8);
    CHECK(recommended_bits(2.0, 1, BitRule::Box) ==
          static_cast<unsigned>(std::ceil(std::log2(32.0 * std::sqrt(2.0)))));
    CHECK(code_of([] { recommended_bits(1.5, 3); }) == Errc::KappaTooSmall);
  }

  TEST_CASE("recommended bits gives alpha bounded away from one") {
    for (double kappa : {2.0, 5.0, 30.0, 400.0}) {
      for (std::size_t d : {1u, 4u, 25u}) {
        const auto q = quad(4, d, 1.0, kappa, 17);
        const DecentralizedGD gd(q);
        const ModelConstants mc = gd.constants();
        const double k = std::max(1.0, 2 * mc.lip_a * mc.lip_c / mc.sigma);
        const unsigned b = recommended_bits(gd.kappa(), d);
        const double a = k / (std::ldexp(1.0, static_cast<int>(b)) - 1.0) + mc.sigma;
        CHECK(a < 1.0);
      }
    }
  }
}
