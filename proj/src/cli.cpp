#include "spinbath/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <mutex>

#include "spinbath/catalog.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/io.hpp"
#include "spinbath/metrics.hpp"
#include "spinbath/target.hpp"

namespace spinbath {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Stream-id namespaces; engine ensembles use ids below 2^52.
constexpr std::uint64_t kStreamDatagen = 1ULL << 60;
constexpr std::uint64_t kStreamPerturb = (1ULL << 60) + 1;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = seed;
  s = splitmix64(s) ^ (a * 0x9e3779b97f4a7c15ULL);
  s = splitmix64(s) ^ (b * 0xc2b2ae3d27d4eb4fULL);
  return splitmix64(s);
}

std::string spacing_name(TauSpacing spacing) { return spacing == TauSpacing::even ? "even" : "iid_uniform"; }

TauSpacing spacing_from_name(const std::string& name) {
  if (name == "even") return TauSpacing::even;
  if (name == "iid_uniform") return TauSpacing::iid_uniform;
  throw ValidationError("unknown tau_spacing '" + name + "' (even | iid_uniform)");
}

std::string mode_name(SignalMode mode) { return mode == SignalMode::verbatim ? "verbatim" : "envelope"; }

SignalMode mode_from_name(const std::string& name) {
  if (name == "verbatim") return SignalMode::verbatim;
  if (name == "envelope") return SignalMode::envelope;
  throw ValidationError("unknown signal_mode '" + name + "' (verbatim | envelope)");
}

std::string lik_mode_name(LikelihoodMode mode) {
  return mode == LikelihoodMode::gaussian ? "gaussian" : "wasserstein_mixed";
}

LikelihoodMode lik_mode_from_name(const std::string& name) {
  if (name == "gaussian") return LikelihoodMode::gaussian;
  if (name == "wasserstein_mixed") return LikelihoodMode::wasserstein_mixed;
  throw ValidationError("unknown likelihood mode '" + name + "' (gaussian | wasserstein_mixed)");
}

json config_to_json(const RunConfig& c) {
  json j;
  j["catalog"] = {{"path", c.catalog.path}, {"cutoff_khz", c.catalog.cutoff_khz}};
  j["experiment"] = {{"n_pulses", c.experiment.n_pulses},
                     {"b_field_gauss", c.experiment.b_field_gauss},
                     {"gamma_n_khz_per_gauss", c.experiment.gamma_n_khz_per_gauss}};
  j["signal_mode"] = mode_name(c.signal_mode);
  j["likelihood"] = {{"sigma2", c.likelihood.sigma2}, {"zeta", c.likelihood.zeta}, {"mode", lik_mode_name(c.likelihood.mode)}};
  j["proposal"] = {{"r_spin_angstrom", c.proposal.r_spin_angstrom},
                   {"r_lambda", c.proposal.r_lambda},
                   {"k_max", c.proposal.k_max},
                   {"birth_prob", c.proposal.birth_prob}};
  j["ladder"] = {{"n_strands", c.ladder.n_strands}, {"factor", c.ladder.factor}};
  j["schedule"] = {{"n_total", c.schedule.n_total},   {"n_rwmh", c.schedule.n_rwmh},
                   {"n_rjmcmc", c.schedule.n_rjmcmc}, {"n_pt", c.schedule.n_pt},
                   {"n_ensembles", c.schedule.n_ensembles}, {"burn_in", c.schedule.burn_in}};
  j["scenario"] = {{"k_true", c.scenario.k_true},
                   {"lambda_true", c.scenario.lambda_true},
                   {"noise_sd", c.scenario.noise_sd},
                   {"n_tau", c.scenario.n_tau},
                   {"tau_max_ms", c.scenario.tau_max_ms},
                   {"tau_spacing", spacing_name(c.scenario.spacing)},
                   {"perturbation_khz", c.scenario.perturbation_khz}};
  j["sweep"] = {{"n_scenarios", c.sweep.n_scenarios}, {"k_true_min", c.sweep.k_true_min}, {"k_true_max", c.sweep.k_true_max}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  j["heartbeat_every"] = c.heartbeat_every;
  return j;
}

void check_known_keys(const json& user, const json& schema, const std::string& prefix) {
  for (const auto& [key, value] : user.items()) {
    if (!schema.contains(key)) throw ValidationError("unknown config key '" + prefix + key + "'");
    if (value.is_object() && schema.at(key).is_object()) check_known_keys(value, schema.at(key), prefix + key + "/");
  }
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  check_known_keys(j, config_to_json(c), "/");
  const auto get = [&](const char* section, const char* key, auto fallback) {
    if (!j.contains(section)) return fallback;
    return j.at(section).value(key, fallback);
  };
  c.catalog.path = get("catalog", "path", std::string{});
  c.catalog.cutoff_khz = get("catalog", "cutoff_khz", c.catalog.cutoff_khz);
  c.experiment.n_pulses = get("experiment", "n_pulses", c.experiment.n_pulses);
  c.experiment.b_field_gauss = get("experiment", "b_field_gauss", c.experiment.b_field_gauss);
  c.experiment.gamma_n_khz_per_gauss = get("experiment", "gamma_n_khz_per_gauss", c.experiment.gamma_n_khz_per_gauss);
  c.signal_mode = mode_from_name(j.value("signal_mode", mode_name(c.signal_mode)));
  c.likelihood.sigma2 = get("likelihood", "sigma2", c.likelihood.sigma2);
  c.likelihood.zeta = get("likelihood", "zeta", c.likelihood.zeta);
  c.likelihood.mode = lik_mode_from_name(get("likelihood", "mode", lik_mode_name(c.likelihood.mode)));
  c.proposal.r_spin_angstrom = get("proposal", "r_spin_angstrom", c.proposal.r_spin_angstrom);
  c.proposal.r_lambda = get("proposal", "r_lambda", c.proposal.r_lambda);
  c.proposal.k_max = get("proposal", "k_max", c.proposal.k_max);
  c.proposal.birth_prob = get("proposal", "birth_prob", c.proposal.birth_prob);
  c.ladder.n_strands = get("ladder", "n_strands", c.ladder.n_strands);
  c.ladder.factor = get("ladder", "factor", c.ladder.factor);
  c.schedule.n_total = get("schedule", "n_total", c.schedule.n_total);
  c.schedule.n_rwmh = get("schedule", "n_rwmh", c.schedule.n_rwmh);
  c.schedule.n_rjmcmc = get("schedule", "n_rjmcmc", c.schedule.n_rjmcmc);
  c.schedule.n_pt = get("schedule", "n_pt", c.schedule.n_pt);
  c.schedule.n_ensembles = get("schedule", "n_ensembles", c.schedule.n_ensembles);
  c.schedule.burn_in = get("schedule", "burn_in", c.schedule.burn_in);
  c.scenario.k_true = get("scenario", "k_true", c.scenario.k_true);
  c.scenario.lambda_true = get("scenario", "lambda_true", c.scenario.lambda_true);
  c.scenario.noise_sd = get("scenario", "noise_sd", c.scenario.noise_sd);
  c.scenario.n_tau = get("scenario", "n_tau", c.scenario.n_tau);
  c.scenario.tau_max_ms = get("scenario", "tau_max_ms", c.scenario.tau_max_ms);
  c.scenario.spacing = spacing_from_name(get("scenario", "tau_spacing", spacing_name(c.scenario.spacing)));
  c.scenario.perturbation_khz = get("scenario", "perturbation_khz", c.scenario.perturbation_khz);
  c.sweep.n_scenarios = get("sweep", "n_scenarios", c.sweep.n_scenarios);
  c.sweep.k_true_min = get("sweep", "k_true_min", c.sweep.k_true_min);
  c.sweep.k_true_max = get("sweep", "k_true_max", c.sweep.k_true_max);
  c.seed = j.value("seed", c.seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.workers = j.value("workers", c.workers);
  c.heartbeat_every = j.value("heartbeat_every", c.heartbeat_every);
  return c;
}

/// Load + cutoff + neighbor index at the proposal radius; this is the
/// unperturbed catalog that generates ground truth.
LatticeCatalog load_truth_catalog(const RunConfig& cfg) {
  if (cfg.catalog.path.empty()) {
    throw ValidationError("no catalog path (set catalog.path, --catalog.path or SPINBATH_CATALOG)");
  }
  return load_catalog(cfg.catalog.path, cfg.catalog.cutoff_khz, cfg.proposal.r_spin_angstrom);
}

/// The catalog recovery actually samples over: optionally perturbed to model
/// inaccurate input couplings.
LatticeCatalog recovery_catalog(const RunConfig& cfg, const LatticeCatalog& truth_catalog) {
  if (cfg.scenario.perturbation_khz <= 0.0) return truth_catalog;
  RngStream rng = RngStream::substream(cfg.seed, kStreamPerturb);
  return perturb_catalog(truth_catalog, cfg.scenario.perturbation_khz, rng);
}

SyntheticScenario scenario_from_config(const RunConfig& cfg, std::vector<int> truth_sites) {
  SyntheticScenario s;
  s.truth_sites = std::move(truth_sites);
  s.lambda_true = cfg.scenario.lambda_true;
  s.spec = cfg.experiment;
  s.n_tau = cfg.scenario.n_tau;
  s.tau_max_ms = cfg.scenario.tau_max_ms;
  s.noise_sd = cfg.scenario.noise_sd;
  s.hyperfine_perturbation_khz = cfg.scenario.perturbation_khz;
  s.spacing = cfg.scenario.spacing;
  s.mode = cfg.signal_mode;
  return s;
}

Manifest manifest_from(const RunConfig& cfg, const SyntheticScenario& s) {
  Manifest m;
  m.truth_sites = s.truth_sites;
  m.lambda_true = s.lambda_true;
  m.seed = cfg.seed;
  m.noise_sd = s.noise_sd;
  m.hyperfine_perturbation_khz = s.hyperfine_perturbation_khz;
  m.n_tau = s.n_tau;
  m.tau_max_ms = s.tau_max_ms;
  m.spacing = s.spacing;
  m.mode = s.mode;
  m.n_pulses = s.spec.n_pulses;
  m.b_field_gauss = s.spec.b_field_gauss;
  m.gamma_n_khz_per_gauss = s.spec.gamma_n_khz_per_gauss;
  return m;
}

void write_resolved_config(const RunConfig& cfg, const std::string& dir) {
  std::ofstream out(dir + "/config.json");
  if (!out) throw ParseError("cannot write config to " + dir);
  out << config_to_json(cfg).dump(2) << '\n';
}

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ParseError("cannot create output directory '" + dir + "': " + ec.message());
}

struct RecoveryArtifacts {
  PosteriorEnsemble posterior;
  RecoveryReport report;
};

/// Shared by recover and sweep: run the hybrid engine against a signal and
/// produce the posterior + report (truth optional).
RecoveryArtifacts run_recovery(const RunConfig& cfg, const LatticeCatalog& rec_catalog, const ObservedSignal& signal,
                               const std::optional<std::vector<int>>& truth_sites, std::uint64_t seed,
                               const std::string& part_dir) {
  ExperimentSpec spec = cfg.experiment;
  spec.tau_grid_ms = signal.tau_ms;
  PosteriorTarget target(rec_catalog, spec, signal, cfg.likelihood, cfg.signal_mode);
  const TemperatureLadder ladder = TemperatureLadder::geometric(cfg.ladder.n_strands, cfg.ladder.factor);

  RunHooks hooks;
  std::vector<std::unique_ptr<std::ofstream>> parts;
  std::vector<std::string> part_paths;
  if (!part_dir.empty()) {
    // Append-only per-ensemble traces, flushed per cycle; a crash loses at
    // most the cycle in flight. Merged (in ensemble order) after the run.
    parts.resize(static_cast<std::size_t>(cfg.schedule.n_ensembles));
    for (int e = 0; e < cfg.schedule.n_ensembles; ++e) {
      part_paths.push_back(part_dir + "/posterior.e" + std::to_string(e) + ".part.jsonl");
      parts[static_cast<std::size_t>(e)] = std::make_unique<std::ofstream>(part_paths.back());
    }
    hooks.on_record = [&parts](const SampleRecord& rec) {
      *parts[static_cast<std::size_t>(rec.ensemble)] << record_to_line(rec) << '\n';
    };
    hooks.on_cycle_end = [&parts](int ensemble) { parts[static_cast<std::size_t>(ensemble)]->flush(); };
  }
  if (cfg.heartbeat_every > 0) {
    hooks.heartbeat_every = cfg.heartbeat_every;
    static std::mutex heartbeat_mutex;
    hooks.on_heartbeat = [](int ensemble, long step, const KernelStats& st, double best_error) {
      const std::scoped_lock lock(heartbeat_mutex);
      std::fprintf(stderr, "[heartbeat] ensemble=%d step=%ld best_err=%.6g acc lambda=%.3f site=%.3f rjmcmc=%.3f swap=%.3f\n",
                   ensemble, step, best_error, KernelStats::rate(st.lambda_accepted, st.lambda_proposed),
                   KernelStats::rate(st.site_accepted, st.site_proposed),
                   KernelStats::rate(st.rjmcmc_accepted, st.rjmcmc_proposed),
                   KernelStats::rate(st.swap_accepted, st.swap_proposed));
    };
  }

  RecoveryArtifacts out;
  out.posterior = run(target, cfg.proposal, ladder, cfg.schedule, seed, cfg.workers, hooks);
  for (auto& p : parts) p->close();
  for (const auto& path : part_paths) fs::remove(path);
  out.report = build_report(out.posterior, rec_catalog, truth_sites);
  return out;
}

const std::vector<std::string> kSweepAxes = {"n_tau", "noise_sd", "delta", "sigma2", "zeta", "r_spin"};

void apply_axis(RunConfig& cfg, const std::string& axis, double value) {
  if (axis == "n_tau") {
    cfg.scenario.n_tau = static_cast<int>(std::llround(value));
  } else if (axis == "noise_sd") {
    cfg.scenario.noise_sd = value;
  } else if (axis == "delta") {
    cfg.scenario.perturbation_khz = value;
  } else if (axis == "sigma2") {
    cfg.likelihood.sigma2 = value;
  } else if (axis == "zeta") {
    cfg.likelihood.zeta = value;
    cfg.likelihood.mode = LikelihoodMode::wasserstein_mixed;
  } else if (axis == "r_spin") {
    cfg.proposal.r_spin_angstrom = value;
  } else {
    throw ValidationError("unknown sweep axis '" + axis + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  experiment_checks();
  if (!(likelihood.sigma2 > 0.0)) throw ValidationError("likelihood.sigma2 must be > 0");
  if (!(likelihood.zeta >= 0.0 && likelihood.zeta <= 1.0)) throw ValidationError("likelihood.zeta must be in [0, 1]");
  if (!(proposal.r_spin_angstrom > 0.0)) throw ValidationError("proposal.r_spin must be > 0");
  if (!(proposal.r_lambda > 0.0 && proposal.r_lambda < 1.0)) throw ValidationError("proposal.r_lambda must be in (0, 1)");
  if (proposal.k_max < 1) throw ValidationError("proposal.k_max must be >= 1");
  if (!(proposal.birth_prob > 0.0 && proposal.birth_prob < 1.0)) throw ValidationError("proposal.birth_prob must be in (0, 1)");
  if (ladder.n_strands < 1) throw ValidationError("ladder.n_strands must be >= 1");
  if (!(ladder.factor > 0.0 && ladder.factor < 1.0)) throw ValidationError("ladder.factor must be in (0, 1)");
  schedule.validate();
  if (schedule.n_pt > 0 && ladder.n_strands < 2) throw ValidationError("schedule.n_pt > 0 needs ladder.n_strands >= 2");
  if (scenario.k_true < 0) throw ValidationError("scenario.k_true must be >= 0");
  if (!(scenario.lambda_true >= kLambdaMin && scenario.lambda_true <= 1.0)) {
    throw ValidationError("scenario.lambda_true must be in [1e-6, 1]");
  }
  if (scenario.noise_sd < 0.0) throw ValidationError("scenario.noise_sd must be >= 0");
  if (scenario.n_tau < 1) throw ValidationError("scenario.n_tau must be >= 1");
  if (!(scenario.tau_max_ms > 0.0)) throw ValidationError("scenario.tau_max_ms must be > 0");
  if (scenario.perturbation_khz < 0.0) throw ValidationError("scenario.perturbation_khz must be >= 0");
  if (sweep.n_scenarios < 1) throw ValidationError("sweep.n_scenarios must be >= 1");
  if (sweep.k_true_min < 0 || sweep.k_true_max < sweep.k_true_min) {
    throw ValidationError("sweep k_true range must satisfy 0 <= k_true_min <= k_true_max");
  }
  if (workers < 0) throw ValidationError("workers must be >= 0");
  if (heartbeat_every < 0) throw ValidationError("heartbeat_every must be >= 0");
  if (catalog.cutoff_khz < 0.0) throw ValidationError("catalog.cutoff_khz must be >= 0");
}

void RunConfig::experiment_checks() const {
  if (experiment.n_pulses < 1) throw ValidationError("experiment.n_pulses must be >= 1");
  if (!(experiment.b_field_gauss > 0.0)) throw ValidationError("experiment.b_field_gauss must be > 0");
  if (experiment.gamma_n_khz_per_gauss == 0.0) throw ValidationError("experiment.gamma_n must be nonzero");
}

RunConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return config_from_json(j);
}

std::string config_to_json_text(const RunConfig& config) { return config_to_json(config).dump(2); }

RunConfig load_run_config(const std::optional<std::string>& config_path,
                          const std::map<std::string, std::string>& overrides) {
  json j = json::object();
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ParseError("cannot open config file: " + *config_path);
    try {
      j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ParseError(*config_path + ": " + e.what());
    }
  }
  for (const auto& [pointer, raw] : overrides) {
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // not a JSON literal: keep as string
    j[json::json_pointer(pointer)] = value;
  }
  return config_from_json(j);
}

int cmd_generate(const RunConfig& cfg) {
  cfg.validate();
  const LatticeCatalog catalog = load_truth_catalog(cfg);
  RngStream rng = RngStream::substream(cfg.seed, kStreamDatagen);
  SyntheticScenario scenario = scenario_from_config(cfg, sample_bath(catalog, cfg.scenario.k_true, rng));
  const SyntheticSignal synth = synthesize(scenario, catalog, rng);

  ensure_output_dir(cfg.output_dir);
  write_signal(cfg.output_dir + "/signal.csv", synth.observed);
  write_manifest(cfg.output_dir + "/manifest.json", manifest_from(cfg, scenario));
  write_resolved_config(cfg, cfg.output_dir);
  std::printf("generated %d points (k_true=%d, lambda_true=%.4g, noise_sd=%.4g) -> %s\n",
              static_cast<int>(synth.observed.tau_ms.size()), static_cast<int>(scenario.truth_sites.size()),
              scenario.lambda_true, scenario.noise_sd, cfg.output_dir.c_str());
  return kExitOk;
}

int cmd_recover(const RunConfig& cfg, const std::string& signal_path,
                const std::optional<std::string>& manifest_path) {
  cfg.validate();
  const ObservedSignal signal = read_signal(signal_path);
  const LatticeCatalog truth_catalog = load_truth_catalog(cfg);
  const LatticeCatalog rec_catalog = recovery_catalog(cfg, truth_catalog);

  std::optional<std::vector<int>> truth;
  if (manifest_path) truth = read_manifest(*manifest_path).truth_sites;

  ensure_output_dir(cfg.output_dir);
  const RecoveryArtifacts artifacts = run_recovery(cfg, rec_catalog, signal, truth, cfg.seed, cfg.output_dir);

  write_posterior(cfg.output_dir + "/posterior.jsonl", artifacts.posterior);
  write_report(cfg.output_dir + "/report.json", artifacts.report, rec_catalog);
  ExperimentSpec spec = cfg.experiment;
  spec.tau_grid_ms = signal.tau_ms;
  const PosteriorTarget trace_target(rec_catalog, spec, signal, cfg.likelihood, cfg.signal_mode);
  write_error_trace(cfg.output_dir + "/error_trace.csv", error_trace(artifacts.posterior, trace_target));
  write_resolved_config(cfg, cfg.output_dir);

  std::printf("recover: %ld post-burn-in samples, k_mode=%d, %zu plausible sites -> %s\n",
              artifacts.report.n_samples_post_burn_in, artifacts.report.k_modal, artifacts.report.plausible.size(),
              cfg.output_dir.c_str());
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& axis, const std::vector<double>& values,
              const std::string& table_name) {
  cfg.validate();
  if (values.empty()) throw ValidationError("sweep needs at least one axis value");
  if (std::find(kSweepAxes.begin(), kSweepAxes.end(), axis) == kSweepAxes.end()) {
    throw ValidationError("unknown sweep axis '" + axis + "'");
  }

  ensure_output_dir(cfg.output_dir);
  const std::string table_path = cfg.output_dir + "/" + table_name + ".csv";
  std::ofstream table(table_path);
  if (!table) throw ParseError("cannot open sweep table for writing: " + table_path);
  table << "axis,value,bin_lo_khz,bin_hi_khz,mean_detection_rate,n_truth_spins,false_positive_rate,mean_discrepancy\n";
  table.precision(10);

  const MagnitudeBins bins;
  const int k_span = cfg.sweep.k_true_max - cfg.sweep.k_true_min + 1;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    RunConfig run_cfg = cfg;
    apply_axis(run_cfg, axis, values[vi]);
    run_cfg.validate();
    const LatticeCatalog truth_catalog = load_truth_catalog(run_cfg);

    struct BinAccumulator {
      double detection_sum = 0.0;
      int n_truth = 0;
      long fp_spins = 0, fp_false = 0;
    };
    std::map<int, BinAccumulator> acc;
    double discrepancy_sum = 0.0;

    for (int i = 0; i < run_cfg.sweep.n_scenarios; ++i) {
      const std::uint64_t scenario_seed = mix_seed(cfg.seed, vi, static_cast<std::uint64_t>(i));
      RunConfig scen_cfg = run_cfg;
      scen_cfg.seed = scenario_seed;
      scen_cfg.scenario.k_true = run_cfg.sweep.k_true_min + (i % k_span);

      RngStream gen_rng = RngStream::substream(scenario_seed, kStreamDatagen);
      SyntheticScenario scenario =
          scenario_from_config(scen_cfg, sample_bath(truth_catalog, scen_cfg.scenario.k_true, gen_rng));
      const SyntheticSignal synth = synthesize(scenario, truth_catalog, gen_rng);
      const LatticeCatalog rec_catalog = recovery_catalog(scen_cfg, truth_catalog);

      const RecoveryArtifacts artifacts =
          run_recovery(scen_cfg, rec_catalog, synth.observed, scenario.truth_sites, scenario_seed, "");
      discrepancy_sum += static_cast<double>(artifacts.report.discrepancy.value_or(0));
      for (const auto& d : artifacts.report.detections) {
        auto& a = acc[bins.bin_of(d.magnitude_khz)];
        a.detection_sum += d.rate;
        ++a.n_truth;
      }
      for (const auto& b : artifacts.report.false_positives.bins) {
        auto& a = acc[bins.bin_of(b.lo_khz)];
        a.fp_spins += b.n_spins;
        a.fp_false += b.n_false;
      }
      std::fprintf(stderr, "[sweep] %s=%.6g scenario %d/%d done (k_true=%d)\n", axis.c_str(), values[vi], i + 1,
                   run_cfg.sweep.n_scenarios, scen_cfg.scenario.k_true);
    }

    const double mean_disc = discrepancy_sum / static_cast<double>(run_cfg.sweep.n_scenarios);
    for (const auto& [bin, a] : acc) {
      table << axis << ',' << values[vi] << ',' << bins.lower(bin) << ','
            << (std::isfinite(bins.upper(bin)) ? std::to_string(bins.upper(bin)) : "inf") << ','
            << (a.n_truth > 0 ? a.detection_sum / a.n_truth : 0.0) << ',' << a.n_truth << ','
            << (a.fp_spins > 0 ? static_cast<double>(a.fp_false) / static_cast<double>(a.fp_spins) : 0.0) << ','
            << mean_disc << '\n';
    }
    table.flush();
  }
  write_resolved_config(cfg, cfg.output_dir);
  std::printf("sweep %s over %zu values -> %s\n", axis.c_str(), values.size(), table_path.c_str());
  return kExitOk;
}

int cmd_report(const RunConfig& cfg, const std::string& run_dir, const std::optional<std::string>& reference_path) {
  cfg.validate();
  const LatticeCatalog truth_catalog = load_truth_catalog(cfg);
  const LatticeCatalog rec_catalog = recovery_catalog(cfg, truth_catalog);
  const PosteriorEnsemble posterior = read_posterior(run_dir + "/posterior.jsonl", cfg.schedule.burn_in);

  std::optional<std::vector<int>> truth;
  if (fs::exists(run_dir + "/manifest.json")) truth = read_manifest(run_dir + "/manifest.json").truth_sites;

  const RecoveryReport report = build_report(posterior, rec_catalog, truth);
  write_report(run_dir + "/report.json", report, rec_catalog);
  if (reference_path) {
    const auto rows = read_reference_table(*reference_path);
    const double gamma_b = cfg.experiment.gamma_n_khz_per_gauss * cfg.experiment.b_field_gauss;
    write_comparison(run_dir + "/comparison.csv", compare_to_reference(posterior, rec_catalog, gamma_b, rows));
  }
  std::printf("report: %ld post-burn-in samples, k_mode=%d -> %s/report.json\n", report.n_samples_post_burn_in,
              report.k_modal, run_dir.c_str());
  return kExitOk;
}

int cmd_baseline(long n_sites, long n_draw, const std::vector<long>& class_sizes,
                 const std::optional<std::string>& out_path) {
  if (class_sizes.empty()) throw ValidationError("baseline needs at least one class size");
  std::printf("hypergeometric baselines: population=%ld, draws=%ld\n", n_sites, n_draw);
  std::printf("%12s %18s %18s\n", "class_size", "p_at_least_once", "p_at_least_twice");
  std::string csv = "class_size,p_at_least_once,p_at_least_twice\n";
  char buf[128];
  for (long m : class_sizes) {
    const double p1 = baseline_probability(n_sites, n_draw, m, 1);
    const double p2 = baseline_probability(n_sites, n_draw, m, 2);
    std::printf("%12ld %18.6f %18.6f\n", m, p1, p2);
    std::snprintf(buf, sizeof(buf), "%ld,%.10f,%.10f\n", m, p1, p2);
    csv += buf;
  }
  if (out_path) {
    std::ofstream out(*out_path);
    if (!out) throw ParseError("cannot open baseline table for writing: " + *out_path);
    out << csv;
  }
  return kExitOk;
}

namespace {

/// One flag per config key; values land in a pointer->raw-string map and are
/// applied onto the JSON config after it is read.
void add_config_options(CLI::App* cmd, std::optional<std::string>& config_path,
                        std::map<std::string, std::string>& overrides) {
  cmd->add_option("--config", config_path, "JSON run-config file");
  static const std::vector<std::pair<const char*, const char*>> keys = {
      {"--catalog.path", "/catalog/path"},
      {"--catalog.cutoff_khz", "/catalog/cutoff_khz"},
      {"--experiment.n_pulses", "/experiment/n_pulses"},
      {"--experiment.b_field_gauss", "/experiment/b_field_gauss"},
      {"--experiment.gamma_n_khz_per_gauss", "/experiment/gamma_n_khz_per_gauss"},
      {"--signal_mode", "/signal_mode"},
      {"--likelihood.sigma2", "/likelihood/sigma2"},
      {"--likelihood.zeta", "/likelihood/zeta"},
      {"--likelihood.mode", "/likelihood/mode"},
      {"--proposal.r_spin_angstrom", "/proposal/r_spin_angstrom"},
      {"--proposal.r_lambda", "/proposal/r_lambda"},
      {"--proposal.k_max", "/proposal/k_max"},
      {"--proposal.birth_prob", "/proposal/birth_prob"},
      {"--ladder.n_strands", "/ladder/n_strands"},
      {"--ladder.factor", "/ladder/factor"},
      {"--schedule.n_total", "/schedule/n_total"},
      {"--schedule.n_rwmh", "/schedule/n_rwmh"},
      {"--schedule.n_rjmcmc", "/schedule/n_rjmcmc"},
      {"--schedule.n_pt", "/schedule/n_pt"},
      {"--schedule.n_ensembles", "/schedule/n_ensembles"},
      {"--schedule.burn_in", "/schedule/burn_in"},
      {"--scenario.k_true", "/scenario/k_true"},
      {"--scenario.lambda_true", "/scenario/lambda_true"},
      {"--scenario.noise_sd", "/scenario/noise_sd"},
      {"--scenario.n_tau", "/scenario/n_tau"},
      {"--scenario.tau_max_ms", "/scenario/tau_max_ms"},
      {"--scenario.tau_spacing", "/scenario/tau_spacing"},
      {"--scenario.perturbation_khz", "/scenario/perturbation_khz"},
      {"--sweep.n_scenarios", "/sweep/n_scenarios"},
      {"--sweep.k_true_min", "/sweep/k_true_min"},
      {"--sweep.k_true_max", "/sweep/k_true_max"},
      {"--seed", "/seed"},
      {"--output_dir", "/output_dir"},
      {"--workers", "/workers"},
      {"--heartbeat_every", "/heartbeat_every"},
  };
  for (const auto& [flag, pointer] : keys) {
    auto* opt = cmd->add_option_function<std::string>(
        flag, [&overrides, p = pointer](const std::string& v) { overrides[p] = v; });
    if (std::string(flag) == "--catalog.path") opt->envname("SPINBATH_CATALOG");
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"hybrid MCMC recovery of nuclear spin baths from coherence data"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::map<std::string, std::string> overrides;

  auto* generate = app.add_subcommand("generate", "synthesize a coherence signal + manifest");
  add_config_options(generate, config_path, overrides);

  auto* recover = app.add_subcommand("recover", "run the hybrid sampler against a signal file");
  std::string signal_path;
  std::optional<std::string> manifest_path;
  recover->add_option("signal", signal_path, "signal CSV (tau_ms,coherence)")->required();
  recover->add_option("--manifest", manifest_path, "generation manifest (enables truth metrics)");
  add_config_options(recover, config_path, overrides);

  auto* sweep = app.add_subcommand("sweep", "hyperparameter sweep over scenario batches");
  std::string axis;
  std::vector<double> values;
  std::string table_name = "sweep";
  sweep->add_option("--axis", axis, "n_tau | noise_sd | delta | sigma2 | zeta | r_spin")->required();
  sweep->add_option("--values", values, "axis values")->required();
  sweep->add_option("--table-name", table_name, "output table base name (e.g. fig2d)");
  add_config_options(sweep, config_path, overrides);

  auto* report = app.add_subcommand("report", "recompute metrics from a stored posterior");
  std::string run_dir;
  std::optional<std::string> reference_path;
  report->add_option("--run-dir", run_dir, "directory with posterior.jsonl (+ config.json, manifest.json)")->required();
  report->add_option("--reference", reference_path, "reference table CSV for a comparison export");
  add_config_options(report, config_path, overrides);

  auto* baseline = app.add_subcommand("baseline", "hypergeometric baseline probabilities");
  long n_sites = 3518, n_draw = 50;
  std::vector<long> class_sizes = {3, 6, 9, 12};
  std::optional<std::string> baseline_out;
  baseline->add_option("--n-sites", n_sites, "population size");
  baseline->add_option("--n-draw", n_draw, "configuration size drawn");
  baseline->add_option("--class-sizes", class_sizes, "symmetry class sizes");
  baseline->add_option("--out", baseline_out, "also write a CSV table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (baseline->parsed()) return cmd_baseline(n_sites, n_draw, class_sizes, baseline_out);
    RunConfig cfg = load_run_config(
        report->parsed() && !config_path ? std::optional<std::string>(run_dir + "/config.json") : config_path,
        overrides);
    if (generate->parsed()) return cmd_generate(cfg);
    if (recover->parsed()) return cmd_recover(cfg, signal_path, manifest_path);
    if (sweep->parsed()) return cmd_sweep(cfg, axis, values, table_name);
    if (report->parsed()) return cmd_report(cfg, run_dir, reference_path);
    throw ValidationError("no subcommand given");
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error (validation): %s\n", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error (validation): %s\n", e.what());
    return kExitValidation;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error (io): %s\n", e.what());
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "error (io): %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}

}  // namespace spinbath
