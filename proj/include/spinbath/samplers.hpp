#pragma once

#include <span>
#include <vector>

#include "spinbath/chain_state.hpp"
#include "spinbath/rng.hpp"
#include "spinbath/target.hpp"

namespace spinbath {

struct ProposalConfig {
  double r_spin_angstrom = 5.0;  // discrete-walk radius; must match the catalog's neighbor index
  double r_lambda = 0.01;        // continuous-walk radius on [lambda_min, 1]
  int k_max = 50;
  double birth_prob = 0.5;

  void validate(const LatticeCatalog& catalog) const;
};

/// beta_1 = 1 > beta_2 > ... > beta_J > 0.
struct TemperatureLadder {
  std::vector<double> betas;

  static TemperatureLadder geometric(int n_strands, double factor = 0.5);

  int size() const { return static_cast<int>(betas.size()); }
  void validate() const;
};

/// Fold x into [lo, hi] by reflection at both boundaries.
double reflect_into(double lo, double hi, double x);

/// log of the PT swap acceptance, (beta_a - beta_b) * (ll_b - ll_a).
double pt_swap_log_alpha(double beta_a, double beta_b, double ll_a, double ll_b);

/// One RWMH update of lambda: uniform kernel of radius r_lambda with
/// reflecting boundaries at [lambda_min, 1] (symmetric, so the kernel ratio
/// is 1). Returns whether the proposal was accepted.
bool rwmh_lambda_step(ChainState& state, const PosteriorTarget& target, const ProposalConfig& cfg, RngStream& rng);

/// One discrete random-walk update: a uniformly chosen occupied site proposes
/// a uniform draw from its unoccupied neighbors. The Hastings factor is
/// n_from / n_to, the unoccupied-neighbor counts of the source (before the
/// move) and of the destination (after it); without the correction detailed
/// balance fails on the enumeration check. `beta` tempers the likelihood
/// ratio only. A site with no free neighbors is a forced rejection; so is
/// k = 0.
bool rwmh_site_step(ChainState& state, const PosteriorTarget& target, const ProposalConfig& cfg, RngStream& rng,
                    double beta = 1.0);

/// One birth/death move over the model dimension. Births draw uniformly from
/// the unoccupied sites, deaths remove a uniform occupant; the acceptance
/// ratio carries both the dimension-kernel ratio (with boundary-adjusted
/// probabilities at k = 0 and k = k_max) and the within-move proposal
/// densities.
bool rjmcmc_step(ChainState& state, const PosteriorTarget& target, const ProposalConfig& cfg, RngStream& rng);

struct PtSweepResult {
  int site_accepts = 0;
  bool swap_attempted = false;
  bool swap_accepted = false;
};

/// One parallel-tempering sweep: every strand advances by one site step under
/// its tempered score, then one uniformly drawn pair attempts a configuration
/// swap. All strands must share lambda and k (the hybrid cycle fixes both
/// while PT runs); strand j consumes only strand_rngs[j], so within-strand
/// steps may run in any order.
PtSweepResult pt_sweep(std::vector<ChainState>& states, const TemperatureLadder& ladder, const PosteriorTarget& target,
                       const ProposalConfig& cfg, std::span<RngStream> strand_rngs, RngStream& swap_rng);

}  // namespace spinbath
