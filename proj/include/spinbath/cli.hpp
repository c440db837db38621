#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinbath/datagen.hpp"
#include "spinbath/engine.hpp"
#include "spinbath/likelihood.hpp"

namespace spinbath {

/// Process exit codes: validation failures, unreadable/unwritable files and
/// everything else get distinct classes.
enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitIo = 3, kExitRuntime = 4 };

struct CatalogConfig {
  std::string path;
  double cutoff_khz = 5.0;
};

struct ScenarioConfig {
  int k_true = 10;
  double lambda_true = 0.05;
  double noise_sd = 0.001;
  int n_tau = 250;
  double tau_max_ms = 0.008;
  TauSpacing spacing = TauSpacing::even;
  double perturbation_khz = 0.0;
};

struct SweepConfig {
  int n_scenarios = 16;
  int k_true_min = 5;
  int k_true_max = 20;
};

struct LadderConfig {
  int n_strands = 10;
  double factor = 0.5;
};

/// Fully resolved run configuration; one of these is serialized into every
/// output directory so reruns are reproducible from the artifact alone.
struct RunConfig {
  CatalogConfig catalog;
  ExperimentSpec experiment;  // tau grid built per command
  SignalMode signal_mode = SignalMode::verbatim;
  LikelihoodConfig likelihood;
  ProposalConfig proposal;
  LadderConfig ladder;
  ScheduleConfig schedule;
  ScenarioConfig scenario;
  SweepConfig sweep;
  std::uint64_t seed = 1234;
  std::string output_dir = "out";
  int workers = 0;
  long heartbeat_every = 0;

  void validate() const;
  void experiment_checks() const;
};

/// Default config -> JSON -> config round trip; flag overrides are applied as
/// JSON pointer assignments, one flag per key.
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& config);
RunConfig load_run_config(const std::optional<std::string>& config_path,
                          const std::map<std::string, std::string>& overrides);

int cmd_generate(const RunConfig& config);
int cmd_recover(const RunConfig& config, const std::string& signal_path,
                const std::optional<std::string>& manifest_path);
int cmd_sweep(const RunConfig& config, const std::string& axis, const std::vector<double>& values,
              const std::string& table_name);
int cmd_report(const RunConfig& config, const std::string& run_dir, const std::optional<std::string>& reference_path);
int cmd_baseline(long n_sites, long n_draw, const std::vector<long>& class_sizes,
                 const std::optional<std::string>& out_path);

/// Full argv entry point used by the binary; maps errors to exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace spinbath
