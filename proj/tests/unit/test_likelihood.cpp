#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/likelihood.hpp"
#include "spinbath/rng.hpp"

using namespace spinbath;
using namespace spinbath::testing;

namespace {

ObservedSignal make_signal(std::initializer_list<double> tau, std::initializer_list<double> values) {
  ObservedSignal s;
  s.tau_ms.resize(static_cast<Eigen::Index>(tau.size()));
  s.values.resize(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double t : tau) s.tau_ms[i++] = t;
  i = 0;
  for (double v : values) s.values[i++] = v;
  return s;
}

}  // namespace

TEST_CASE("gaussian log-likelihood") {
  LikelihoodConfig cfg;
  cfg.sigma2 = 0.1;

  SUBCASE("perfect model scores zero") {
    const ObservedSignal data = make_signal({1, 2, 3}, {0.3, 0.7, 0.9});
    CHECK(log_likelihood_gaussian(data, data.values, cfg) == 0.0);
  }

  SUBCASE("single point: -5 r^2 at sigma2 = 0.1") {
    const ObservedSignal data = make_signal({1}, {1.0});
    Eigen::ArrayXd model(1);
    model << 1.0 - 0.2;
    CHECK(log_likelihood_gaussian(data, model, cfg) == doctest::Approx(-5.0 * 0.04).epsilon(1e-15));
  }

  SUBCASE("residuals (0.1, -0.2, 0.3) at sigma2 = 0.1 score -0.7") {
    const ObservedSignal data = make_signal({1, 2, 3}, {1.0, 1.0, 1.0});
    Eigen::ArrayXd model(3);
    model << 1.0 - 0.1, 1.0 + 0.2, 1.0 - 0.3;
    CHECK(log_likelihood_gaussian(data, model, cfg) == doctest::Approx(-0.7).epsilon(1e-14));
  }

  SUBCASE("pair-permutation invariance and sigma2 scaling") {
    const ObservedSignal data = make_signal({1, 2, 3}, {0.2, 0.5, 0.8});
    Eigen::ArrayXd model(3);
    model << 0.25, 0.45, 0.95;
    const double base = log_likelihood_gaussian(data, model, cfg);

    const ObservedSignal permuted_data = make_signal({1, 2, 3}, {0.8, 0.2, 0.5});
    Eigen::ArrayXd permuted_model(3);
    permuted_model << 0.95, 0.25, 0.45;
    CHECK(log_likelihood_gaussian(permuted_data, permuted_model, cfg) == doctest::Approx(base).epsilon(1e-15));

    LikelihoodConfig half = cfg;
    half.sigma2 = 0.05;
    CHECK(log_likelihood_gaussian(data, model, half) == doctest::Approx(2.0 * base).epsilon(1e-13));
  }

  SUBCASE("length mismatch throws") {
    const ObservedSignal data = make_signal({1, 2}, {0.1, 0.2});
    CHECK_THROWS_AS(log_likelihood_gaussian(data, Eigen::ArrayXd::Ones(3), cfg), ValidationError);
  }
}

TEST_CASE("w2 squared on the tau support") {
  SUBCASE("identical signals score zero") {
    const ObservedSignal data = make_signal({1, 2, 3}, {0.3, 0.9, 0.1});
    CHECK(w2_squared(data, data.values) == 0.0);
  }

  SUBCASE("point masses transport as (a - b)^2") {
    const ObservedSignal data = make_signal({1.0, 2.0, 4.0}, {1.0, 0.0, 0.0});
    Eigen::ArrayXd model(3);
    model << 0.0, 0.0, 1.0;  // mass at tau = 4
    CHECK(w2_squared(data, model) == doctest::Approx(9.0).epsilon(1e-14));
  }

  SUBCASE("frozen 3-point example vs the transport LP oracle") {
    // data mass (0.5, 0.5, 0), model mass (0, 0.5, 0.5) on support {1, 2, 3}.
    const ObservedSignal data = make_signal({1, 2, 3}, {1.0, 1.0, 0.0});
    Eigen::ArrayXd model(3);
    model << 0.0, 1.0, 1.0;
    const double got = w2_squared(data, model);
    const double lp = oracle_transport_w2sq({1, 2, 3}, {0.5, 0.5, 0.0}, {1, 2, 3}, {0.0, 0.5, 0.5});
    CHECK(got == doctest::Approx(1.0).epsilon(1e-12));  // two half-masses moved one step each
    CHECK(got == doctest::Approx(lp).epsilon(1e-11));
  }

  SUBCASE("constant signals normalize to uniform, not an error") {
    const ObservedSignal data = make_signal({1, 2, 3}, {0.5, 0.5, 0.5});
    Eigen::ArrayXd model(3);
    model << 2.0, 2.0, 2.0;
    CHECK(w2_squared(data, model) == 0.0);  // both uniform
    CHECK((normalize_to_distribution(data.values) == 1.0 / 3.0).all());
  }

  SUBCASE("symmetry and positivity on random inputs, LP cross-check") {
    RngStream rng(424242);
    for (int trial = 0; trial < 30; ++trial) {
      ObservedSignal data;
      const int n = 5;
      data.tau_ms.resize(n);
      data.values.resize(n);
      Eigen::ArrayXd model(n);
      double t = 0.0;
      for (int i = 0; i < n; ++i) {
        t += rng.uniform(0.1, 1.0);
        data.tau_ms[i] = t;
        data.values[i] = rng.uniform(-1.0, 2.0);
        model[i] = rng.uniform(-1.0, 2.0);
      }
      const double ab = w2_squared(data, model);
      ObservedSignal swapped = data;
      swapped.values = model;
      const double ba = w2_squared(swapped, data.values);
      CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
      CHECK(ab >= 0.0);

      const std::vector<double> tau(data.tau_ms.begin(), data.tau_ms.end());
      const Eigen::ArrayXd p = normalize_to_distribution(data.values);
      const Eigen::ArrayXd q = normalize_to_distribution(model);
      const double lp = oracle_transport_w2sq(tau, {p.begin(), p.end()}, tau, {q.begin(), q.end()});
      CHECK(std::abs(ab - lp) < 1e-9);
    }
  }
}

TEST_CASE("combined score") {
  const ObservedSignal data = make_signal({1, 2, 3}, {1.0, 1.0, 1.0});
  Eigen::ArrayXd model(3);
  model << 0.9, 1.2, 0.7;
  LikelihoodConfig cfg;
  cfg.sigma2 = 0.1;
  cfg.mode = LikelihoodMode::wasserstein_mixed;

  SUBCASE("zeta = 0 equals the gaussian score bit-for-bit") {
    cfg.zeta = 0.0;
    LikelihoodConfig gauss = cfg;
    gauss.mode = LikelihoodMode::gaussian;
    CHECK(log_likelihood(data, model, cfg) == log_likelihood_gaussian(data, model, gauss));
  }

  SUBCASE("zeta = 1 with a perfect model scores zero") {
    cfg.zeta = 1.0;
    CHECK(log_likelihood(data, data.values, cfg) == 0.0);
  }

  SUBCASE("zeta = 0.5 composes the two oracles") {
    cfg.zeta = 0.5;
    const double expected = 0.5 * log_likelihood_gaussian(data, model, cfg) - 0.5 * w2_squared(data, model);
    CHECK(log_likelihood(data, model, cfg) == doctest::Approx(expected).epsilon(1e-15));
  }

  SUBCASE("literal probability-space form is exposed for reporting") {
    cfg.zeta = 0.5;
    const double literal = literal_mixed_likelihood(data, model, cfg);
    const double expected =
        0.5 * std::exp(log_likelihood_gaussian(data, model, cfg)) - 0.5 * w2_squared(data, model);
    CHECK(literal == doctest::Approx(expected).epsilon(1e-14));
  }

  SUBCASE("finite scores under randomized inputs") {
    RngStream rng(31337);
    for (int trial = 0; trial < 200; ++trial) {
      ObservedSignal d;
      const int n = 1 + static_cast<int>(rng.uniform_below(20));
      d.tau_ms.resize(n);
      d.values.resize(n);
      Eigen::ArrayXd m(n);
      double t = 0.0;
      for (int i = 0; i < n; ++i) {
        t += rng.uniform(0.01, 0.5);
        d.tau_ms[i] = t;
        d.values[i] = rng.uniform(-2.0, 2.0);
        m[i] = rng.uniform(-2.0, 2.0);
      }
      LikelihoodConfig c;
      c.sigma2 = rng.uniform(1e-3, 2.0);
      c.zeta = rng.uniform(0.0, 1.0);
      c.mode = trial % 2 == 0 ? LikelihoodMode::gaussian : LikelihoodMode::wasserstein_mixed;
      CHECK(std::isfinite(log_likelihood(d, m, c)));
    }
  }

  SUBCASE("invalid configs throw") {
    LikelihoodConfig bad;
    bad.sigma2 = 0.0;
    CHECK_THROWS_AS(log_likelihood(data, model, bad), ValidationError);
    bad.sigma2 = 0.1;
    bad.zeta = 1.5;
    CHECK_THROWS_AS(log_likelihood(data, model, bad), ValidationError);
  }
}
