#pragma once

#include <cstdint>
#include <vector>

#include "spinbath/forward_model.hpp"
#include "spinbath/likelihood.hpp"
#include "spinbath/rng.hpp"

namespace spinbath {

enum class TauSpacing { even, iid_uniform };

/// Everything needed to synthesize one experiment: the ground truth, the
/// experiment parameters, the sampling of tau and the noise level.
struct SyntheticScenario {
  std::vector<int> truth_sites;  // sorted site ids into the generating catalog
  double lambda_true = 0.05;
  ExperimentSpec spec;  // tau_grid_ms ignored; built from n_tau/tau_max below
  int n_tau = 250;
  double tau_max_ms = 0.008;
  double noise_sd = 0.001;
  double hyperfine_perturbation_khz = 0.0;  // applied to the recovery catalog, not the truth
  TauSpacing spacing = TauSpacing::even;
  SignalMode mode = SignalMode::verbatim;

  void validate() const;
};

/// k_true distinct site ids drawn uniformly without replacement.
std::vector<int> sample_bath(const LatticeCatalog& catalog, int k_true, RngStream& rng);

/// Build the tau grid for a scenario: evenly spaced on (0, tau_max] by
/// default, sorted i.i.d. uniform draws when requested.
Eigen::ArrayXd make_tau_grid(const SyntheticScenario& scenario, RngStream& rng);

struct SyntheticSignal {
  ObservedSignal observed;
  Eigen::ArrayXd clean;  // forward model before noise
};

/// Clean forward signal of the truth plus i.i.d. Gaussian noise per point.
SyntheticSignal synthesize(const SyntheticScenario& scenario, const LatticeCatalog& catalog, RngStream& rng);

/// Appendix-D style mismatch: every coupling component shifted by +-delta
/// with independent uniform signs. When a_perp - delta would go negative the
/// positive sign is forced so the perpendicular component stays admissible
/// (the shift magnitude is still exactly delta). Symmetry classes are
/// recomputed; site ids and positions stay aligned with the source catalog.
LatticeCatalog perturb_catalog(const LatticeCatalog& catalog, double delta_khz, RngStream& rng);

}  // namespace spinbath
