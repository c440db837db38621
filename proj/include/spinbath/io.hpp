#pragma once

#include <string>
#include <vector>

#include "spinbath/datagen.hpp"
#include "spinbath/engine.hpp"
#include "spinbath/likelihood.hpp"
#include "spinbath/metrics.hpp"

namespace spinbath {

/// Signal files: `tau_ms,coherence` with a header row.
void write_signal(const std::string& path, const ObservedSignal& signal);
ObservedSignal read_signal(const std::string& path);

/// Generation manifest: everything needed to rebuild the exact clean signal.
struct Manifest {
  std::vector<int> truth_sites;
  double lambda_true = 0.05;
  std::uint64_t seed = 0;
  double noise_sd = 0.001;
  double hyperfine_perturbation_khz = 0.0;
  int n_tau = 250;
  double tau_max_ms = 0.008;
  TauSpacing spacing = TauSpacing::even;
  SignalMode mode = SignalMode::verbatim;
  int n_pulses = 16;
  double b_field_gauss = 311.0;
  double gamma_n_khz_per_gauss = 1.0705;
};

void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

SyntheticScenario scenario_from_manifest(const Manifest& manifest);

/// Line-delimited posterior records, one JSON object per line with fields
/// ensemble, step, k, lambda, site_ids, loglik.
std::string record_to_line(const SampleRecord& record);
void write_posterior(const std::string& path, const PosteriorEnsemble& posterior);
/// burn_in is not stored in the record file; pass it from the run config.
PosteriorEnsemble read_posterior(const std::string& path, long burn_in);

void write_report(const std::string& path, const RecoveryReport& report, const LatticeCatalog& catalog);

void write_error_trace(const std::string& path, const std::vector<ErrorTracePoint>& trace);

/// Reference tables for comparison exports: CSV with header
/// `label,a_minus_khz[,a_par_khz,a_perp_khz]`.
std::vector<ReferenceRow> read_reference_table(const std::string& path);
void write_comparison(const std::string& path, const std::vector<ComparisonRow>& rows);

}  // namespace spinbath
