#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "spinbath/samplers.hpp"

namespace spinbath {

struct ScheduleConfig {
  long n_total = 143;   // outer cycles; 143 * (25 + 50 + 100) ~ 25k kernel steps
  int n_rwmh = 25;      // lambda steps per cycle
  int n_rjmcmc = 50;    // dimension steps per cycle
  int n_pt = 100;       // PT sweeps per cycle
  int n_ensembles = 5;  // independent restarts
  long burn_in = 10000; // per-ensemble samples discarded at collection

  long samples_per_ensemble() const {
    return 1 + n_total * static_cast<long>(n_rwmh + n_rjmcmc + n_pt);
  }
  void validate() const;
};

struct SampleRecord {
  int ensemble = 0;
  long step = 0;
  double lambda = 1.0;
  double log_lik = 0.0;
  std::vector<int> sites;  // sorted

  int k() const { return static_cast<int>(sites.size()); }
};

struct KernelStats {
  long lambda_proposed = 0, lambda_accepted = 0;
  long site_proposed = 0, site_accepted = 0;
  long rjmcmc_proposed = 0, rjmcmc_accepted = 0;
  long swap_proposed = 0, swap_accepted = 0;

  static double rate(long accepted, long proposed) {
    return proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  }
};

/// Post-burn-in samples over all ensembles plus the raw traces; the source
/// every metric and report reads from.
struct PosteriorEnsemble {
  std::vector<SampleRecord> samples;  // ordered by (ensemble, step), burn-in included
  long burn_in = 0;
  int n_ensembles = 0;
  std::vector<KernelStats> stats;  // per ensemble

  bool is_post_burn_in(const SampleRecord& r) const { return r.step >= burn_in; }
  long post_burn_in_count() const;
};

struct RunHooks {
  /// Called from worker threads once per recorded sample; must be thread-safe.
  std::function<void(const SampleRecord&)> on_record;
  /// Called every heartbeat_every records per ensemble with running stats and
  /// the best (lowest) mean-abs error seen so far.
  long heartbeat_every = 0;
  std::function<void(int ensemble, long step, const KernelStats&, double best_error)> on_heartbeat;
  /// Called at the end of every cycle (flush point for append-only sinks).
  std::function<void(int ensemble)> on_cycle_end;
  /// When set, every ensemble starts at this k instead of the default
  /// uniform draw over [0, min(10, k_max)].
  std::optional<int> init_k;
  /// When set, every ensemble starts at this lambda instead of the default
  /// uniform draw over [0.5, 1] (used to pin lambda when n_rwmh = 0).
  std::optional<double> init_lambda;
  /// Skip storing records in the returned PosteriorEnsemble (sink-only runs).
  bool store_records = true;
};

/// Alg.-4 scheduler: per ensemble, cycle RWMH(lambda) -> RJMCMC -> PT, record
/// the beta = 1 state after every kernel application. Ensembles draw
/// independent RNG streams keyed by (seed, ensemble, strand) and may run in
/// parallel; outputs are byte-identical for a given (seed, config) regardless
/// of worker count.
PosteriorEnsemble run(const PosteriorTarget& target, const ProposalConfig& proposal, const TemperatureLadder& ladder,
                      const ScheduleConfig& schedule, std::uint64_t seed, int workers = 0, const RunHooks& hooks = {});

struct ErrorTracePoint {
  int ensemble = 0;
  long step = 0;
  double error = 0.0;
};

/// Per-recorded-step mean residual between each stored state's model signal
/// and the data (absolute by default, squared on request), recomputed from
/// the stored states.
std::vector<ErrorTracePoint> error_trace(const PosteriorEnsemble& posterior, const PosteriorTarget& target,
                                         bool squared = false);

}  // namespace spinbath
