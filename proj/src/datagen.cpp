#include "spinbath/datagen.hpp"

#include <algorithm>
#include <numeric>

#include "spinbath/errors.hpp"

namespace spinbath {

void SyntheticScenario::validate() const {
  if (n_tau < 1) throw ValidationError("n_tau must be >= 1");
  if (!(tau_max_ms > 0.0)) throw ValidationError("tau_max must be > 0 ms");
  if (noise_sd < 0.0) throw ValidationError("noise_sd must be >= 0");
  if (hyperfine_perturbation_khz < 0.0) throw ValidationError("hyperfine perturbation must be >= 0 kHz");
  if (!(lambda_true >= kLambdaMin && lambda_true <= 1.0)) throw ValidationError("lambda_true must be in [1e-6, 1]");
  for (std::size_t i = 1; i < truth_sites.size(); ++i) {
    if (truth_sites[i] <= truth_sites[i - 1]) throw ValidationError("truth sites must be sorted and distinct");
  }
}

std::vector<int> sample_bath(const LatticeCatalog& catalog, int k_true, RngStream& rng) {
  const int n = catalog.n_sites();
  if (k_true < 0 || k_true > n) throw ValidationError("k_true must be in [0, n_sites]");
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = 0; i < k_true; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
  }
  std::vector<int> out(ids.begin(), ids.begin() + k_true);
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::ArrayXd make_tau_grid(const SyntheticScenario& scenario, RngStream& rng) {
  Eigen::ArrayXd tau(scenario.n_tau);
  if (scenario.spacing == TauSpacing::even) {
    for (int i = 0; i < scenario.n_tau; ++i) {
      tau[i] = scenario.tau_max_ms * static_cast<double>(i + 1) / static_cast<double>(scenario.n_tau);
    }
    return tau;
  }
  // i.i.d. uniform on (0, tau_max], sorted; re-draw on the (measure-zero)
  // event of a tie so the grid stays strictly increasing.
  for (;;) {
    for (int i = 0; i < scenario.n_tau; ++i) tau[i] = (1.0 - rng.uniform01()) * scenario.tau_max_ms;
    std::sort(tau.begin(), tau.end());
    bool distinct = true;
    for (int i = 1; i < scenario.n_tau; ++i) distinct &= tau[i] > tau[i - 1];
    if (distinct) return tau;
  }
}

SyntheticSignal synthesize(const SyntheticScenario& scenario, const LatticeCatalog& catalog, RngStream& rng) {
  scenario.validate();
  SyntheticScenario s = scenario;
  ExperimentSpec spec = s.spec;
  spec.tau_grid_ms = make_tau_grid(s, rng);
  spec.validate();

  const SpinBath truth = SpinBath::from_sites(catalog, s.truth_sites);
  SyntheticSignal out;
  out.clean = coherence_signal(truth, s.lambda_true, spec, s.mode);
  out.observed.tau_ms = spec.tau_grid_ms;
  out.observed.values = out.clean;
  if (s.noise_sd > 0.0) {
    for (Eigen::Index i = 0; i < out.observed.values.size(); ++i) {
      out.observed.values[i] += rng.normal(0.0, s.noise_sd);
    }
  }
  return out;
}

LatticeCatalog perturb_catalog(const LatticeCatalog& catalog, double delta_khz, RngStream& rng) {
  if (delta_khz < 0.0) throw ValidationError("perturbation delta must be >= 0 kHz");
  std::vector<std::pair<double, double>> couplings;
  couplings.reserve(static_cast<std::size_t>(catalog.n_sites()));
  for (const auto& s : catalog.sites()) {
    const double sign_par = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    double sign_perp = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    if (s.a_perp_khz - delta_khz < 0.0) sign_perp = 1.0;  // keep a_perp >= 0
    couplings.emplace_back(s.a_par_khz + sign_par * delta_khz, s.a_perp_khz + sign_perp * delta_khz);
  }
  return catalog.with_couplings(couplings);
}

}  // namespace spinbath
