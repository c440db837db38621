#include "spinbath/engine.hpp"

#include <algorithm>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

/// Stream ids within an ensemble: 0 = main (init, lambda, rjmcmc, swaps),
/// 1..J = PT strands.
RngStream ensemble_stream(std::uint64_t seed, int ensemble, int sub) {
  return RngStream::substream(seed, (static_cast<std::uint64_t>(ensemble) << 20) | static_cast<std::uint64_t>(sub));
}

ChainState initial_state(const PosteriorTarget& target, const ProposalConfig& proposal, RngStream& rng,
                         const RunHooks& hooks) {
  const int n = target.catalog().n_sites();
  int k0;
  if (hooks.init_k) {
    k0 = *hooks.init_k;
    if (k0 < 0 || k0 > proposal.k_max) throw ValidationError("init_k outside [0, k_max]");
  } else {
    k0 = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(std::min(10, proposal.k_max)) + 1));
  }

  // k0 distinct sites, uniform without replacement (partial Fisher-Yates).
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = 0; i < k0; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
  }

  ChainState state;
  state.sites.assign(ids.begin(), ids.begin() + k0);
  std::sort(state.sites.begin(), state.sites.end());
  state.lambda = rng.uniform(0.5, 1.0);
  if (hooks.init_lambda) {
    if (!(*hooks.init_lambda >= kLambdaMin && *hooks.init_lambda <= 1.0)) {
      throw ValidationError("init_lambda outside [1e-6, 1]");
    }
    state.lambda = *hooks.init_lambda;
  }
  target.refresh(state);
  return state;
}

struct EnsembleContext {
  int ensemble;
  std::vector<SampleRecord>* out;
  KernelStats stats;
};

void run_ensemble(const PosteriorTarget& target, const ProposalConfig& proposal, const TemperatureLadder& ladder,
                  const ScheduleConfig& schedule, std::uint64_t seed, const RunHooks& hooks, EnsembleContext& ctx) {
  RngStream main_rng = ensemble_stream(seed, ctx.ensemble, 0);
  std::vector<RngStream> strand_rngs;
  strand_rngs.reserve(static_cast<std::size_t>(ladder.size()));
  for (int j = 0; j < ladder.size(); ++j) strand_rngs.push_back(ensemble_stream(seed, ctx.ensemble, 1 + j));

  ChainState state = initial_state(target, proposal, main_rng, hooks);

  long step = 0;
  double best_error = std::numeric_limits<double>::infinity();
  const auto record = [&](const ChainState& s) {
    SampleRecord rec;
    rec.ensemble = ctx.ensemble;
    rec.step = step++;
    rec.lambda = s.lambda;
    rec.log_lik = s.log_lik.value_or(-std::numeric_limits<double>::infinity());
    rec.sites = s.sites;
    if (hooks.on_record) hooks.on_record(rec);
    if (hooks.heartbeat_every > 0 && hooks.on_heartbeat && rec.step % hooks.heartbeat_every == 0) {
      best_error = std::min(best_error, target.mean_abs_error(s));
      hooks.on_heartbeat(ctx.ensemble, rec.step, ctx.stats, best_error);
    }
    if (ctx.out) ctx.out->push_back(std::move(rec));
  };

  record(state);
  for (long cycle = 0; cycle < schedule.n_total; ++cycle) {
    for (int i = 0; i < schedule.n_rwmh; ++i) {
      ctx.stats.lambda_accepted += rwmh_lambda_step(state, target, proposal, main_rng) ? 1 : 0;
      ++ctx.stats.lambda_proposed;
      record(state);
    }
    for (int i = 0; i < schedule.n_rjmcmc; ++i) {
      ctx.stats.rjmcmc_accepted += rjmcmc_step(state, target, proposal, main_rng) ? 1 : 0;
      ++ctx.stats.rjmcmc_proposed;
      record(state);
    }
    if (schedule.n_pt > 0) {
      // Alg. 4 hands PT the current point: the whole ladder restarts from it
      // each cycle, and only the beta = 1 strand feeds the posterior.
      std::vector<ChainState> ladder_states(static_cast<std::size_t>(ladder.size()), state);
      for (int i = 0; i < schedule.n_pt; ++i) {
        const auto sweep = pt_sweep(ladder_states, ladder, target, proposal, strand_rngs, main_rng);
        ctx.stats.site_accepted += sweep.site_accepts;
        ctx.stats.site_proposed += ladder.size();
        ctx.stats.swap_proposed += sweep.swap_attempted ? 1 : 0;
        ctx.stats.swap_accepted += sweep.swap_accepted ? 1 : 0;
        record(ladder_states.front());
      }
      state = std::move(ladder_states.front());
    }
    if (hooks.on_cycle_end) hooks.on_cycle_end(ctx.ensemble);
  }
}

}  // namespace

void ScheduleConfig::validate() const {
  if (n_total < 0 || n_rwmh < 0 || n_rjmcmc < 0 || n_pt < 0) throw ValidationError("schedule counts must be >= 0");
  if (n_ensembles < 1) throw ValidationError("need at least one ensemble");
  if (burn_in < 0) throw ValidationError("burn_in must be >= 0");
  if (burn_in >= samples_per_ensemble()) throw ValidationError("burn_in must be below the recorded sample count");
}

long PosteriorEnsemble::post_burn_in_count() const {
  long n = 0;
  for (const auto& r : samples) n += is_post_burn_in(r) ? 1 : 0;
  return n;
}

PosteriorEnsemble run(const PosteriorTarget& target, const ProposalConfig& proposal, const TemperatureLadder& ladder,
                      const ScheduleConfig& schedule, std::uint64_t seed, int workers, const RunHooks& hooks) {
  schedule.validate();
  proposal.validate(target.catalog());
  if (schedule.n_pt > 0) {
    ladder.validate();
    if (ladder.size() < 2) throw ValidationError("PT requires at least 2 strands when n_pt > 0");
  }

  PosteriorEnsemble posterior;
  posterior.burn_in = schedule.burn_in;
  posterior.n_ensembles = schedule.n_ensembles;
  posterior.stats.resize(static_cast<std::size_t>(schedule.n_ensembles));

  std::vector<std::vector<SampleRecord>> buffers(static_cast<std::size_t>(schedule.n_ensembles));
  std::vector<EnsembleContext> contexts;
  contexts.reserve(buffers.size());
  for (int e = 0; e < schedule.n_ensembles; ++e) {
    contexts.push_back(EnsembleContext{e, hooks.store_records ? &buffers[static_cast<std::size_t>(e)] : nullptr, {}});
  }

  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, schedule.n_ensembles));

  if (workers == 1) {
    for (auto& ctx : contexts) run_ensemble(target, proposal, ladder, schedule, seed, hooks, ctx);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (std::size_t e = static_cast<std::size_t>(w); e < contexts.size(); e += static_cast<std::size_t>(workers)) {
            run_ensemble(target, proposal, ladder, schedule, seed, hooks, contexts[e]);
          }
        } catch (...) {
          const std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (int e = 0; e < schedule.n_ensembles; ++e) {
    posterior.stats[static_cast<std::size_t>(e)] = contexts[static_cast<std::size_t>(e)].stats;
    auto& buf = buffers[static_cast<std::size_t>(e)];
    posterior.samples.insert(posterior.samples.end(), std::make_move_iterator(buf.begin()),
                             std::make_move_iterator(buf.end()));
  }
  return posterior;
}

std::vector<ErrorTracePoint> error_trace(const PosteriorEnsemble& posterior, const PosteriorTarget& target,
                                         bool squared) {
  std::vector<ErrorTracePoint> out;
  out.reserve(posterior.samples.size());
  ChainState state;
  for (const auto& rec : posterior.samples) {
    state.sites = rec.sites;
    state.lambda = rec.lambda;
    out.push_back(ErrorTracePoint{rec.ensemble, rec.step, target.mean_abs_error(state, squared)});
  }
  return out;
}

}  // namespace spinbath
