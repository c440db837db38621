#include "spinbath/samplers.hpp"

#include <cmath>

#include "spinbath/errors.hpp"
#include "spinbath/forward_model.hpp"

namespace spinbath {

namespace {

double require_log_lik(const ChainState& state) {
  if (!state.log_lik) throw ValidationError("chain state has no cached log-likelihood; call refresh() first");
  return *state.log_lik;
}

bool accept(RngStream& rng, double log_alpha) {
  if (log_alpha >= 0.0) return true;
  return std::log(rng.uniform01()) < log_alpha;
}

/// Unoccupied (in `state`) neighbors of `site`.
std::vector<int> unoccupied_neighbors(const LatticeCatalog& catalog, const ChainState& state, int site) {
  std::vector<int> out;
  for (int nb : catalog.neighbors(site)) {
    if (!state.occupies(nb)) out.push_back(nb);
  }
  return out;
}

/// gamma(k, k+1): probability the dimension kernel proposes a birth at k.
double gamma_birth(int k, const ProposalConfig& cfg) {
  if (k <= 0) return 1.0;
  if (k >= cfg.k_max) return 0.0;
  return cfg.birth_prob;
}

/// gamma(k, k-1): probability of proposing a death at k.
double gamma_death(int k, const ProposalConfig& cfg) {
  if (k >= cfg.k_max) return 1.0;
  if (k <= 0) return 0.0;
  return 1.0 - cfg.birth_prob;
}

/// The r-th unoccupied site id, in increasing id order.
int nth_unoccupied(const ChainState& state, std::uint64_t r) {
  std::size_t occ = 0;
  int candidate = static_cast<int>(r);
  // state.sites is sorted; every occupied id <= candidate shifts it up once.
  while (occ < state.sites.size() && state.sites[occ] <= candidate) {
    ++candidate;
    ++occ;
  }
  return candidate;
}

}  // namespace

void ProposalConfig::validate(const LatticeCatalog& catalog) const {
  if (!(r_spin_angstrom > 0.0)) throw ValidationError("r_spin must be > 0");
  if (!(r_lambda > 0.0 && r_lambda < 1.0)) throw ValidationError("r_lambda must be in (0, 1)");
  if (k_max < 1) throw ValidationError("k_max must be >= 1");
  if (k_max > catalog.n_sites()) throw ValidationError("k_max exceeds the number of catalog sites");
  if (!(birth_prob > 0.0 && birth_prob < 1.0)) throw ValidationError("birth_prob must be in (0, 1)");
  if (std::abs(r_spin_angstrom - catalog.neighbor_radius()) > 1e-12) {
    throw ValidationError("r_spin must equal the catalog's neighbor-index radius");
  }
}

TemperatureLadder TemperatureLadder::geometric(int n_strands, double factor) {
  if (n_strands < 1) throw ValidationError("ladder needs at least one strand");
  if (!(factor > 0.0 && factor < 1.0)) throw ValidationError("ladder factor must be in (0, 1)");
  TemperatureLadder ladder;
  double beta = 1.0;
  for (int j = 0; j < n_strands; ++j) {
    ladder.betas.push_back(beta);
    beta *= factor;
  }
  return ladder;
}

void TemperatureLadder::validate() const {
  if (betas.empty()) throw ValidationError("empty temperature ladder");
  if (betas.front() != 1.0) throw ValidationError("beta_1 must be exactly 1");
  for (std::size_t j = 0; j < betas.size(); ++j) {
    if (!(betas[j] > 0.0)) throw ValidationError("betas must be positive");
    if (j > 0 && !(betas[j] < betas[j - 1])) throw ValidationError("betas must be strictly decreasing");
  }
}

double reflect_into(double lo, double hi, double x) {
  const double width = hi - lo;
  double y = std::fmod(x - lo, 2.0 * width);
  if (y < 0.0) y += 2.0 * width;
  if (y > width) y = 2.0 * width - y;
  return lo + y;
}

double pt_swap_log_alpha(double beta_a, double beta_b, double ll_a, double ll_b) {
  return (beta_a - beta_b) * (ll_b - ll_a);
}

bool rwmh_lambda_step(ChainState& state, const PosteriorTarget& target, const ProposalConfig& cfg, RngStream& rng) {
  const double current = require_log_lik(state);
  const double step = rng.uniform(-cfg.r_lambda, cfg.r_lambda);
  const double lambda_star = reflect_into(kLambdaMin, 1.0, state.lambda + step);
  const double proposed = target.eval_lambda(state, lambda_star);
  if (accept(rng, proposed - current)) {
    state.lambda = lambda_star;
    state.log_lik = proposed;
    return true;
  }
  return false;
}

bool rwmh_site_step(ChainState& state, const PosteriorTarget& target, const ProposalConfig& cfg, RngStream& rng,
                    double beta) {
  (void)cfg;
  if (state.k() == 0) return false;
  const double current = require_log_lik(state);
  const auto& catalog = target.catalog();

  const int pos = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(state.k())));
  const int from_site = state.sites[static_cast<std::size_t>(pos)];
  const std::vector<int> from_free = unoccupied_neighbors(catalog, state, from_site);
  if (from_free.empty()) return false;  // forced rejection, state unchanged

  const int to_site = from_free[rng.uniform_below(from_free.size())];
  const double n_from = static_cast<double>(from_free.size());
  // Destination count in the post-move state: its free neighbors now include
  // the vacated source (source ~ destination always holds).
  const double n_to = static_cast<double>(unoccupied_neighbors(catalog, state, to_site).size() + 1);

  const auto eval = target.eval_replace(state, pos, to_site);
  const double log_alpha = beta * (eval.log_lik - current) + std::log(n_from) - std::log(n_to);
  if (accept(rng, log_alpha)) {
    state.apply_replace(pos, to_site, eval.col, eval.log_lik);
    return true;
  }
  return false;
}

bool rjmcmc_step(ChainState& state, const PosteriorTarget& target, const ProposalConfig& cfg, RngStream& rng) {
  const double current = require_log_lik(state);
  const auto& catalog = target.catalog();
  const int k = state.k();
  const int n = catalog.n_sites();

  bool propose_birth;
  if (k <= 0) {
    propose_birth = true;
  } else if (k >= cfg.k_max) {
    propose_birth = false;
  } else {
    propose_birth = rng.uniform01() < cfg.birth_prob;
  }

  if (propose_birth) {
    const int n_unocc = n - k;
    const int new_site = nth_unoccupied(state, rng.uniform_below(static_cast<std::uint64_t>(n_unocc)));
    const auto eval = target.eval_birth(state, new_site);
    const double log_alpha = (eval.log_lik - current) +
                             std::log(gamma_death(k + 1, cfg) * static_cast<double>(n_unocc)) -
                             std::log(gamma_birth(k, cfg) * static_cast<double>(k + 1));
    if (accept(rng, log_alpha)) {
      state.apply_birth(new_site, eval.col, eval.log_lik);
      return true;
    }
    return false;
  }

  const int pos = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(k)));
  const double proposed = target.eval_death(state, pos);
  const double log_alpha = (proposed - current) + std::log(gamma_birth(k - 1, cfg) * static_cast<double>(k)) -
                           std::log(gamma_death(k, cfg) * static_cast<double>(n - k + 1));
  if (accept(rng, log_alpha)) {
    state.apply_death(pos, proposed);
    return true;
  }
  return false;
}

PtSweepResult pt_sweep(std::vector<ChainState>& states, const TemperatureLadder& ladder, const PosteriorTarget& target,
                       const ProposalConfig& cfg, std::span<RngStream> strand_rngs, RngStream& swap_rng) {
  ladder.validate();
  const int j_strands = ladder.size();
  if (j_strands < 2) throw ValidationError("parallel tempering needs at least 2 strands");
  if (static_cast<int>(states.size()) != j_strands) throw ValidationError("ladder and state count differ");
  if (static_cast<int>(strand_rngs.size()) != j_strands) throw ValidationError("need one RNG stream per strand");
  for (const auto& s : states) {
    if (s.lambda != states.front().lambda || s.k() != states.front().k()) {
      throw ValidationError("PT strands must share lambda and k");
    }
  }

  PtSweepResult result;
  for (int j = 0; j < j_strands; ++j) {
    if (rwmh_site_step(states[static_cast<std::size_t>(j)], target, cfg, strand_rngs[static_cast<std::size_t>(j)],
                       ladder.betas[static_cast<std::size_t>(j)])) {
      ++result.site_accepts;
    }
  }

  const int a = static_cast<int>(swap_rng.uniform_below(static_cast<std::uint64_t>(j_strands)));
  int b = static_cast<int>(swap_rng.uniform_below(static_cast<std::uint64_t>(j_strands - 1)));
  if (b >= a) ++b;
  result.swap_attempted = true;

  const double ll_a = *states[static_cast<std::size_t>(a)].log_lik;
  const double ll_b = *states[static_cast<std::size_t>(b)].log_lik;
  const double log_alpha = pt_swap_log_alpha(ladder.betas[static_cast<std::size_t>(a)],
                                             ladder.betas[static_cast<std::size_t>(b)], ll_a, ll_b);
  if (accept(swap_rng, log_alpha)) {
    // Equal lambda across strands, so exchanging whole states exchanges
    // exactly the configurations (and their caches).
    std::swap(states[static_cast<std::size_t>(a)], states[static_cast<std::size_t>(b)]);
    result.swap_accepted = true;
  }
  return result;
}

}  // namespace spinbath
