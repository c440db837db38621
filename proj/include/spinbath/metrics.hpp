#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinbath/catalog.hpp"
#include "spinbath/engine.hpp"

namespace spinbath {

/// Half-open magnitude bins [e0, e1), ..., [e_last, inf) in kHz.
struct MagnitudeBins {
  std::vector<double> edges{0.0, 25.0, 50.0, 100.0, 150.0};

  int count() const { return static_cast<int>(edges.size()); }
  int bin_of(double magnitude_khz) const;
  std::string label(int bin) const;
  double lower(int bin) const { return edges.at(static_cast<std::size_t>(bin)); }
  /// +inf for the last bin.
  double upper(int bin) const;
};

/// Detection of one truth spin (copy `copy_index` of its symmetry class): the
/// fraction of post-burn-in samples containing at least copy_index spins of
/// that class.
struct SpinDetection {
  int truth_site = -1;
  int symmetry_class = -1;
  int copy_index = 1;  // 1-based within the class
  double a_par_khz = 0.0;
  double a_perp_khz = 0.0;
  double magnitude_khz = 0.0;
  double rate = 0.0;
};

std::vector<SpinDetection> detection_rate(const PosteriorEnsemble& posterior, const LatticeCatalog& catalog,
                                          const std::vector<int>& truth_sites);

std::map<int, long> k_histogram(const PosteriorEnsemble& posterior);

/// Mode of the k histogram; ties break toward smaller k.
int k_mode(const std::map<int, long>& histogram);

int dimension_discrepancy(const PosteriorEnsemble& posterior, int k_true);

struct FalsePositiveBin {
  double lo_khz = 0.0;
  double hi_khz = 0.0;
  int n_spins = 0;
  int n_false = 0;
  double rate = 0.0;
};

struct FalsePositiveReport {
  int modal_k = 0;
  std::vector<int> modal_config;       // ties -> lexicographically smallest
  std::vector<FalsePositiveBin> bins;  // only bins that contain modal spins
};

/// Restrict to samples at the modal k, take the modal exact configuration,
/// and classify its spins against the truth by class-with-multiplicity
/// matching, aggregated per magnitude bin.
FalsePositiveReport false_positive_rate(const PosteriorEnsemble& posterior, const LatticeCatalog& catalog,
                                        const std::vector<int>& truth_sites, const MagnitudeBins& bins);

/// Hypergeometric baseline: probability that a class of `class_size` sites
/// appears at least `occurrence` (1 or 2) times in a uniform draw of `n_draw`
/// of `n_sites` sites. Exact via log-factorials.
double baseline_probability(long n_sites, long n_draw, long class_size, int occurrence);

/// Sites whose posterior occupancy frequency strictly exceeds `threshold`
/// (default 0: every site seen in at least one post-burn-in sample).
std::vector<int> plausible_sites(const PosteriorEnsemble& posterior, int n_sites, double threshold = 0.0);

struct Histogram {
  std::vector<double> edges;   // n_bins + 1
  std::vector<long> counts;    // n_bins
};

Histogram lambda_histogram(const PosteriorEnsemble& posterior, int n_bins = 50);

/// Shannon entropy (nats) of a normalized histogram.
double histogram_entropy(const Histogram& hist);

/// Mode bin center of a histogram; ties break toward the lower bin.
double histogram_mode_center(const Histogram& hist);

struct RecoveryReport {
  std::map<int, long> k_hist;
  int k_modal = 0;
  long n_samples_post_burn_in = 0;
  std::optional<int> discrepancy;  // set when truth is known
  std::vector<SpinDetection> detections;
  FalsePositiveReport false_positives;
  MagnitudeBins magnitude_bins;
  Histogram lambda_posterior;
  std::vector<int> plausible;
  /// Mean detection rate of truth spins per magnitude bin (bin -> (mean, n)).
  std::map<int, std::pair<double, int>> detection_by_bin;
};

RecoveryReport build_report(const PosteriorEnsemble& posterior, const LatticeCatalog& catalog,
                            const std::optional<std::vector<int>>& truth_sites, const MagnitudeBins& bins = {},
                            int lambda_bins = 50);

/// Reference table row for comparison exports: a labelled effective
/// frequency A- (and optionally the reference couplings).
struct ReferenceRow {
  std::string label;
  double a_minus_khz = 0.0;
  std::optional<double> a_par_khz;
  std::optional<double> a_perp_khz;
};

struct ComparisonRow {
  std::string label;
  double a_minus_ref_khz = 0.0;
  double a_minus_rec_khz = 0.0;
  double a_par_khz = 0.0;
  double a_perp_khz = 0.0;
  double detection_rate = 0.0;
};

/// A- = sqrt((gamma B_z - A_par)^2 + A_perp^2), gamma B_z in kHz.
double effective_frequency_khz(double gamma_b_khz, double a_par_khz, double a_perp_khz);

/// Match every reference row to the catalog class with the closest effective
/// frequency and report that class's posterior detection rate. Rows that hit
/// an already-claimed class count as the next copy of it (at-least-twice
/// accounting for duplicated couplings).
std::vector<ComparisonRow> compare_to_reference(const PosteriorEnsemble& posterior, const LatticeCatalog& catalog,
                                                double gamma_b_khz, const std::vector<ReferenceRow>& rows);

}  // namespace spinbath
