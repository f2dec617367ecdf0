#include <doctest.h>

#include <cmath>
#include <limits>

#include <gridquant/complexity.hpp>
#include <gridquant/error.hpp>

using namespace gridquant;

namespace {

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_SUITE("complexity") {
  TEST_CASE("contraction gain") {
    // N = 20, d = 1, mu = 1, L = 3, step 2 / (N (mu + L)): L_A = 0.5, L_C = 3
    CHECK(contraction_gain(0.5, 3.0, 0.5) == doctest::Approx(6.0));
    CHECK(contraction_gain(0.0, 0.0, 0.3) == 1.0);
    CHECK(contraction_gain(1.0, 1.0, 0.9) == doctest::Approx(2.0 / 0.9));
    CHECK(code_of([] { contraction_gain(1.0, 1.0, 1.0); }) == Errc::InvalidSigma);
    CHECK(code_of([] { contraction_gain(1.0, 1.0, 0.0); }) == Errc::InvalidSigma);
  }

  TEST_CASE("alpha") {
    CHECK(alpha(5, 1.0, 0.9) == doctest::Approx(0.9 + 1.0 / 31.0).epsilon(1e-15));
    CHECK(alpha(5, 1.0, 0.9) == doctest::Approx(0.93226).epsilon(1e-5));
    CHECK(alpha(7, 0.0, 0.4) == 0.4);
    double prev = alpha(1, 1.0, 0.9);
    for (unsigned b = 2; b <= 64; ++b) {
      const double a = alpha(b, 1.0, 0.9);
      CHECK(a <= prev);
      if (b < 40) CHECK(a < prev);
      prev = a;
    }
    CHECK(alpha(64, 1.0, 0.9) == doctest::Approx(0.9));
  }

  TEST_CASE("min bits") {
    CHECK(min_bits(1.0, 0.9) == 4);
    CHECK(min_bits(1.0, 0.5) == 2);
    CHECK(min_bits(1e-9, 0.5) == 1);
    for (double k : {1.0, 3.0, 17.5, 1000.0}) {
      for (double s : {0.1, 0.5, 0.99}) {
        const unsigned b = min_bits(k, s);
        CHECK(alpha(b, k, s) < 1.0);
        if (b > 1) CHECK(alpha(b - 1, k, s) >= 1.0);
      }
    }
  }

  TEST_CASE("radius schedule") {
    CHECK(radius_schedule(0, 1.0, 1.0, 0.5, 1.0) == 0.5);
    CHECK(radius_schedule(2, 6.0, 0.5, 0.93226, 1.0) == doctest::Approx(12.0 * std::pow(0.93226, 3)));
    CHECK(radius_schedule(2, 6.0, 0.5, 0.93226, 1.0) == doctest::Approx(9.723).epsilon(1e-3));
    for (unsigned long long k = 0; k < 50; ++k) {
      CHECK(radius_schedule(k + 1, 2.0, 0.3, 0.8, 4.0) / radius_schedule(k, 2.0, 0.3, 0.8, 4.0) ==
            doctest::Approx(0.8));
    }
  }

  TEST_CASE("iterations to eps") {
    const double k5 = iterations_to_eps(5, 1.0, 0.9, 1.0, 0.1);
    CHECK(k5 == doctest::Approx(std::log(10.0) / (0.1 - 1.0 / 31.0)));
    CHECK(k5 == doctest::Approx(33.99).epsilon(1e-3));
    CHECK(iterations_to_eps(5, 1.0, 0.9, 1.0, 1.0) == 0.0);
    CHECK(iterations_to_eps(5, 1.0, 0.9, 1.0, 2.0) == 0.0);
    CHECK(iterations_to_eps(64, 1.0, 0.9, 1.0, 0.1) == doctest::Approx(std::log(10.0) / 0.1));
    CHECK(code_of([] { iterations_to_eps(3, 1.0, 0.9, 1.0, 0.1); }) == Errc::Divergent);
    CHECK(code_of([] { iterations_to_eps(5, 1.0, 0.9, 1.0, 0.0); }) == Errc::InvalidEps);
  }

  TEST_CASE("total bits") {
    CHECK(total_bits(5, 1.0, 0.9, 1.0, 0.1) == doctest::Approx(5.0 * std::log(10.0) / (0.1 - 1.0 / 31.0)));
    CHECK(total_bits(6, 1.0, 0.9, 1.0, 0.1) == doctest::Approx(6.0 * std::log(10.0) / (0.1 - 1.0 / 63.0)));
    CHECK(total_bits(6, 1.0, 0.9, 1.0, 0.1) == doctest::Approx(164.2).epsilon(1e-3));
    CHECK(code_of([] { total_bits(min_bits(1.0, 0.9) - 1, 1.0, 0.9, 1.0, 0.1); }) == Errc::Divergent);
    // blows up just above min_bits, grows without bound for large b
    CHECK(total_bits(4, 1.0, 0.9, 1.0, 0.1) > total_bits(5, 1.0, 0.9, 1.0, 0.1));
    CHECK(total_bits(64, 1.0, 0.9, 1.0, 0.1) > 8.0 * total_bits(6, 1.0, 0.9, 1.0, 0.1));
  }

  TEST_CASE("optimal bits") {
    // Hand evaluation: B(5) = 169.95, B(6) = 164.22, B(7) = 174.96.
    CHECK(optimal_bits(1.0, 0.9, 1.0, 0.1, 64) == 6);
    CHECK(optimal_bits(1.0, 0.9, 1.0, 0.1, 5) == 5);
    CHECK(optimal_bits(1.0, 0.9, 1.0, 0.1, 4) == 4);
    CHECK(code_of([] { optimal_bits(1.0, 0.9, 1.0, 0.1, 3); }) == Errc::EmptyRange);
    // exhaustive oracle
    for (double s : {0.01, 0.3, 0.7, 0.95}) {
      for (double k : {1.0, 5.0, 40.0}) {
        unsigned best = 0;
        double best_val = std::numeric_limits<double>::infinity();
        for (unsigned b = 1; b <= 64; ++b) {
          const double a = k / (std::ldexp(1.0, static_cast<int>(b)) - 1.0) + s;
          if (a >= 1.0) continue;
          const double v = b * std::log(10.0) / (1.0 - a);
          if (v < best_val) {
            best_val = v;
            best = b;
          }
        }
        CHECK(optimal_bits(k, s, 1.0, 0.1, 64) == best);
      }
    }
    // smaller sigma -> no larger optimum
    CHECK(optimal_bits(1.0, 0.01, 1.0, 0.1, 64) <= optimal_bits(1.0, 0.9, 1.0, 0.1, 64));
  }
}
