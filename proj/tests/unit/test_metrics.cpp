#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/metrics.hpp"

using namespace spinbath;
using namespace spinbath::testing;

namespace {

/// Hand-built posterior: each entry is one post-burn-in sample.
PosteriorEnsemble posterior_of(const std::vector<std::vector<int>>& configs, double lambda = 0.5) {
  PosteriorEnsemble posterior;
  posterior.burn_in = 0;
  posterior.n_ensembles = 1;
  long step = 0;
  for (const auto& sites : configs) {
    SampleRecord rec;
    rec.ensemble = 0;
    rec.step = step++;
    rec.lambda = lambda;
    rec.log_lik = 0.0;
    rec.sites = sites;
    posterior.samples.push_back(rec);
  }
  return posterior;
}

}  // namespace

TEST_CASE("magnitude bins") {
  const MagnitudeBins bins;
  CHECK(bins.bin_of(10.0) == 0);
  CHECK(bins.bin_of(25.0) == 1);
  CHECK(bins.bin_of(160.0) == 4);
  CHECK(std::isinf(bins.upper(4)));
  // magnitude of (-20.72, 12) kHz lands in [0, 25)
  CHECK(std::hypot(-20.72, 12.0) == doctest::Approx(23.944).epsilon(1e-3));
  CHECK(bins.bin_of(std::hypot(-20.72, 12.0)) == 0);
}

TEST_CASE("detection rate") {
  // Catalog with a duplicated coupling class: sites 0 and 1 share a class.
  auto catalog = line_catalog({{40, 12}, {40, 12}, {25, 30}, {55, 5}}, 1.0, 10.0, 0.0);
  REQUIRE(catalog.class_of(0) == catalog.class_of(1));

  SUBCASE("rate is the fraction of samples containing the class") {
    // Truth spin of class c present in 6 of 10 samples.
    std::vector<std::vector<int>> configs;
    for (int i = 0; i < 6; ++i) configs.push_back({0, 2});
    for (int i = 0; i < 4; ++i) configs.push_back({2});
    const auto posterior = posterior_of(configs);
    const auto rates = detection_rate(posterior, catalog, {0});
    REQUIRE(rates.size() == 1);
    CHECK(rates[0].rate == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(rates[0].copy_index == 1);
  }

  SUBCASE("multiset rule: one occupant detects copy 1, not copy 2") {
    const auto posterior = posterior_of({{0, 2}});
    const auto rates = detection_rate(posterior, catalog, {0, 1});  // two truth spins, same class
    REQUIRE(rates.size() == 2);
    CHECK(rates[0].copy_index == 1);
    CHECK(rates[1].copy_index == 2);
    CHECK(rates[0].rate == 1.0);
    CHECK(rates[1].rate == 0.0);
    // Site 1 occupies the same class: either site counts for copy 1.
    const auto swapped = detection_rate(posterior_of({{1, 2}}), catalog, {0, 1});
    CHECK(swapped[0].rate == 1.0);
    CHECK(swapped[1].rate == 0.0);
    // Both copies present.
    const auto both = detection_rate(posterior_of({{0, 1}}), catalog, {0, 1});
    CHECK(both[0].rate == 1.0);
    CHECK(both[1].rate == 1.0);
  }

  SUBCASE("spin occupied in every sample has rate exactly 1") {
    const auto posterior = posterior_of({{2, 3}, {1, 2}, {2}});
    const auto rates = detection_rate(posterior, catalog, {2});
    CHECK(rates[0].rate == 1.0);
  }

  SUBCASE("empty posterior is an error") {
    PosteriorEnsemble posterior = posterior_of({{0}});
    posterior.burn_in = 5;  // everything burned
    CHECK_THROWS_AS(detection_rate(posterior, catalog, {0}), ValidationError);
  }
}

TEST_CASE("k mode and dimension discrepancy") {
  auto catalog = line_catalog({{40, 12}, {-35, 20}, {25, 30}, {55, 5}}, 1.0, 10.0, 0.0);

  SUBCASE("all samples at the truth") {
    std::vector<std::vector<int>> configs(12, std::vector<int>{0, 1, 2});
    CHECK(dimension_discrepancy(posterior_of(configs), 3) == 0);
  }

  SUBCASE("tie breaks toward smaller k") {
    const auto posterior = posterior_of({{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}});
    // k=1 count 3, k=2 count 3: tie -> mode 1.
    CHECK(k_mode(k_histogram(posterior)) == 1);
    CHECK(dimension_discrepancy(posterior, 2) == 1);
  }
}

TEST_CASE("false positive rate") {
  auto catalog = line_catalog({{40, 12}, {-35, 20}, {25, 30}, {200, 10}}, 1.0, 10.0, 0.0);
  const MagnitudeBins bins;

  SUBCASE("modal configuration equal to truth has zero rate everywhere") {
    const auto posterior = posterior_of({{0, 1}, {0, 1}, {2}});
    const auto report = false_positive_rate(posterior, catalog, {0, 1}, bins);
    CHECK(report.modal_k == 2);
    CHECK(report.modal_config == std::vector<int>{0, 1});
    for (const auto& b : report.bins) CHECK(b.rate == 0.0);
  }

  SUBCASE("an extra strong spin shows up only in its magnitude bin") {
    // Truth {0, 1}; modal config {0, 1, 3} with site 3 at ~200 kHz.
    const auto posterior = posterior_of({{0, 1, 3}, {0, 1, 3}, {0, 1}});
    // modal k must be 3 (2 of 3 samples)
    const auto report = false_positive_rate(posterior, catalog, {0, 1}, bins);
    CHECK(report.modal_k == 3);
    for (const auto& b : report.bins) {
      if (b.lo_khz == 150.0) {
        CHECK(b.n_spins == 1);
        CHECK(b.n_false == 1);
        CHECK(b.rate == 1.0);
      } else {
        CHECK(b.rate == 0.0);
      }
    }
  }

  SUBCASE("modal-config tie breaks lexicographically") {
    const auto posterior = posterior_of({{0, 2}, {0, 1}});
    const auto report = false_positive_rate(posterior, catalog, {0, 1}, bins);
    CHECK(report.modal_config == std::vector<int>{0, 1});
  }

  SUBCASE("duplicate-class accounting marks the second copy false when truth has one") {
    auto dup_catalog = line_catalog({{40, 12}, {40, 12}, {25, 30}}, 1.0, 10.0, 0.0);
    const auto posterior = posterior_of({{0, 1}});
    const auto report = false_positive_rate(posterior, dup_catalog, {0, 2}, bins);
    // Modal config {0,1}: class of 0 appears twice, truth has it once ->
    // one true positive, one false positive, same bin.
    int total_false = 0, total_spins = 0;
    for (const auto& b : report.bins) {
      total_false += b.n_false;
      total_spins += b.n_spins;
    }
    CHECK(total_spins == 2);
    CHECK(total_false == 1);
  }
}

TEST_CASE("hypergeometric baselines") {
  SUBCASE("paper parameter set at (3518, 50)") {
    CHECK(baseline_probability(3518, 50, 3, 1) == doctest::Approx(0.0420).epsilon(0.012));
    CHECK(baseline_probability(3518, 50, 6, 1) == doctest::Approx(0.0824).epsilon(0.007));
    CHECK(baseline_probability(3518, 50, 9, 1) == doctest::Approx(0.1210).epsilon(0.005));
    CHECK(baseline_probability(3518, 50, 12, 1) == doctest::Approx(0.1581).epsilon(0.004));
    CHECK(baseline_probability(3518, 50, 6, 2) == doctest::Approx(0.0029).epsilon(0.2));
    CHECK(baseline_probability(3518, 50, 12, 2) == doctest::Approx(0.0119).epsilon(0.05));
  }

  SUBCASE("degenerate full draw") {
    CHECK(baseline_probability(40, 40, 5, 1) == 1.0);
  }

  SUBCASE("matches a Monte Carlo estimate on a small instance") {
    const double exact1 = baseline_probability(40, 12, 5, 1);
    const double exact2 = baseline_probability(40, 12, 5, 2);
    const auto [mc1, se1] = mc_hypergeometric_tail(40, 12, 5, 1, 10'000'000, 8);
    const auto [mc2, se2] = mc_hypergeometric_tail(40, 12, 5, 2, 10'000'000, 9);
    CHECK(std::abs(exact1 - mc1) < 5.0 * se1 + 1e-12);
    CHECK(std::abs(exact2 - mc2) < 5.0 * se2 + 1e-12);
  }

  SUBCASE("input validation") {
    CHECK_THROWS_AS(baseline_probability(10, 5, 0, 1), ValidationError);
    CHECK_THROWS_AS(baseline_probability(10, 11, 3, 1), ValidationError);
    CHECK_THROWS_AS(baseline_probability(10, 5, 3, 3), ValidationError);
  }
}

TEST_CASE("plausible sites") {
  auto catalog = line_catalog({{40, 12}, {-35, 20}, {25, 30}, {55, 5}}, 1.0, 10.0, 0.0);

  SUBCASE("posterior visiting only {0, 1} yields exactly those sites") {
    const auto posterior = posterior_of({{0, 1}, {0, 1}});
    CHECK(plausible_sites(posterior, catalog.n_sites()) == std::vector<int>{0, 1});
  }

  SUBCASE("impossible threshold yields nothing; monotone in the threshold") {
    const auto posterior = posterior_of({{0, 1}, {0}, {0}, {2}});
    CHECK(plausible_sites(posterior, catalog.n_sites(), 1.1).empty());
    std::size_t last = catalog.sites().size() + 1;
    for (double threshold : {0.0, 0.2, 0.3, 0.8}) {
      const auto sites = plausible_sites(posterior, catalog.n_sites(), threshold);
      CHECK(sites.size() <= last);
      last = sites.size();
    }
  }
}

TEST_CASE("lambda histogram helpers") {
  PosteriorEnsemble posterior = posterior_of({{0}, {0}, {0}, {0}}, 0.31);
  posterior.samples[3].lambda = 0.93;
  const Histogram hist = lambda_histogram(posterior, 10);
  CHECK(hist.counts[3] == 3);
  CHECK(hist.counts[9] == 1);
  CHECK(histogram_mode_center(hist) == doctest::Approx(0.35).epsilon(1e-12));

  // Entropy: concentrated < spread.
  Histogram concentrated{{0, 0.5, 1.0}, {10, 0}};
  Histogram spread{{0, 0.5, 1.0}, {5, 5}};
  CHECK(histogram_entropy(concentrated) < histogram_entropy(spread));
}

TEST_CASE("comparison export against a reference table") {
  auto catalog = line_catalog({{40, 12}, {40, 12}, {-35, 20}, {200, 10}}, 1.0, 10.0, 0.0);
  const double gamma_b = 1.0705 * 403.0;

  // Posterior fixture tuned so the class of sites {0,1} has rate 0.8760 for
  // copy 1 and 0.25 for copy 2.
  std::vector<std::vector<int>> configs;
  for (int i = 0; i < 10000; ++i) {
    if (i < 2500) {
      configs.push_back({0, 1});
    } else if (i < 8760) {
      configs.push_back({0, 3});
    } else {
      configs.push_back({3});
    }
  }
  const auto posterior = posterior_of(configs);

  std::vector<ReferenceRow> rows(3);
  rows[0].label = "C2";
  rows[0].a_minus_khz = effective_frequency_khz(gamma_b, 40.0, 12.0);
  rows[1].label = "C2b";  // duplicated coupling -> at-least-twice accounting
  rows[1].a_minus_khz = effective_frequency_khz(gamma_b, 40.0, 12.0);
  rows[2].label = "C9";
  rows[2].a_minus_khz = effective_frequency_khz(gamma_b, 200.0, 10.0);

  const auto table = compare_to_reference(posterior, catalog, gamma_b, rows);
  REQUIRE(table.size() == 3);
  CHECK(table[0].label == "C2");
  CHECK(table[0].detection_rate == doctest::Approx(0.8760).epsilon(1e-12));
  CHECK(table[0].a_par_khz == 40.0);
  CHECK(table[1].detection_rate == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(table[2].detection_rate == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(table[2].a_minus_rec_khz == doctest::Approx(table[2].a_minus_ref_khz).epsilon(1e-12));
}

TEST_CASE("build_report wires everything together") {
  auto catalog = line_catalog({{40, 12}, {-35, 20}, {25, 30}, {200, 10}}, 1.0, 10.0, 0.0);
  const auto posterior = posterior_of({{0, 1}, {0, 1}, {0, 2}, {0}});
  const auto report = build_report(posterior, catalog, std::vector<int>{0, 1});
  CHECK(report.k_modal == 2);
  CHECK(report.n_samples_post_burn_in == 4);
  CHECK(report.discrepancy.has_value());
  CHECK(*report.discrepancy == 0);
  CHECK(report.detections.size() == 2);
  CHECK(report.plausible == std::vector<int>{0, 1, 2});
  long hist_total = 0;
  for (const auto& [k, count] : report.k_hist) hist_total += count;
  CHECK(hist_total == 4);
}
