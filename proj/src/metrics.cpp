#include "spinbath/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

void require_post_burn_in_samples(const PosteriorEnsemble& posterior) {
  if (posterior.post_burn_in_count() == 0) throw ValidationError("posterior has no post-burn-in samples");
}

/// Count of sample spins per symmetry class.
std::map<int, int> class_multiset(const LatticeCatalog& catalog, const std::vector<int>& sites) {
  std::map<int, int> counts;
  for (int id : sites) ++counts[catalog.class_of(id)];
  return counts;
}

double lchoose(long n, long k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

/// P(X = x) for X ~ Hypergeometric(n_sites, class_size, n_draw).
double hypergeom_pmf(long n_sites, long n_draw, long class_size, long x) {
  const double log_p =
      lchoose(class_size, x) + lchoose(n_sites - class_size, n_draw - x) - lchoose(n_sites, n_draw);
  return std::isfinite(log_p) ? std::exp(log_p) : 0.0;
}

}  // namespace

int MagnitudeBins::bin_of(double magnitude_khz) const {
  int bin = 0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (magnitude_khz >= edges[i]) bin = static_cast<int>(i);
  }
  return bin;
}

double MagnitudeBins::upper(int bin) const {
  return bin + 1 < count() ? edges[static_cast<std::size_t>(bin) + 1] : std::numeric_limits<double>::infinity();
}

std::string MagnitudeBins::label(int bin) const {
  const double lo = lower(bin);
  if (bin + 1 == count()) return ">=" + std::to_string(static_cast<long>(lo)) + " kHz";
  return "[" + std::to_string(static_cast<long>(lo)) + ", " + std::to_string(static_cast<long>(upper(bin))) +
         ") kHz";
}

std::vector<SpinDetection> detection_rate(const PosteriorEnsemble& posterior, const LatticeCatalog& catalog,
                                          const std::vector<int>& truth_sites) {
  require_post_burn_in_samples(posterior);

  std::vector<SpinDetection> out;
  std::map<int, int> copies_seen;
  for (int site : truth_sites) {
    SpinDetection d;
    d.truth_site = site;
    d.symmetry_class = catalog.class_of(site);
    d.copy_index = ++copies_seen[d.symmetry_class];
    d.a_par_khz = catalog.site(site).a_par_khz;
    d.a_perp_khz = catalog.site(site).a_perp_khz;
    d.magnitude_khz = catalog.coupling_magnitude_khz(site);
    out.push_back(d);
  }

  long n_samples = 0;
  std::vector<long> hits(out.size(), 0);
  for (const auto& rec : posterior.samples) {
    if (!posterior.is_post_burn_in(rec)) continue;
    ++n_samples;
    const auto counts = class_multiset(catalog, rec.sites);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto it = counts.find(out[i].symmetry_class);
      if (it != counts.end() && it->second >= out[i].copy_index) ++hits[i];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].rate = static_cast<double>(hits[i]) / static_cast<double>(n_samples);
  }
  return out;
}

std::map<int, long> k_histogram(const PosteriorEnsemble& posterior) {
  std::map<int, long> hist;
  for (const auto& rec : posterior.samples) {
    if (posterior.is_post_burn_in(rec)) ++hist[rec.k()];
  }
  return hist;
}

int k_mode(const std::map<int, long>& histogram) {
  if (histogram.empty()) throw ValidationError("empty k histogram");
  int best_k = histogram.begin()->first;
  long best = histogram.begin()->second;
  for (const auto& [k, count] : histogram) {
    if (count > best) {  // ties keep the smaller k (map iterates ascending)
      best = count;
      best_k = k;
    }
  }
  return best_k;
}

int dimension_discrepancy(const PosteriorEnsemble& posterior, int k_true) {
  require_post_burn_in_samples(posterior);
  return std::abs(k_mode(k_histogram(posterior)) - k_true);
}

FalsePositiveReport false_positive_rate(const PosteriorEnsemble& posterior, const LatticeCatalog& catalog,
                                        const std::vector<int>& truth_sites, const MagnitudeBins& bins) {
  require_post_burn_in_samples(posterior);
  FalsePositiveReport report;
  report.modal_k = k_mode(k_histogram(posterior));

  // Modal exact configuration among samples at the modal k; map ordering
  // makes the tie-break (lexicographically smallest) automatic.
  std::map<std::vector<int>, long> config_counts;
  for (const auto& rec : posterior.samples) {
    if (posterior.is_post_burn_in(rec) && rec.k() == report.modal_k) ++config_counts[rec.sites];
  }
  long best = -1;
  for (const auto& [config, count] : config_counts) {
    if (count > best) {
      best = count;
      report.modal_config = config;
    }
  }

  auto truth_counts = class_multiset(catalog, truth_sites);
  std::map<int, FalsePositiveBin> by_bin;
  std::map<int, int> claimed;
  for (int site : report.modal_config) {
    const int cls = catalog.class_of(site);
    const bool is_true_positive = ++claimed[cls] <= (truth_counts.count(cls) ? truth_counts[cls] : 0);
    const int bin = bins.bin_of(catalog.coupling_magnitude_khz(site));
    auto& b = by_bin[bin];
    b.lo_khz = bins.lower(bin);
    b.hi_khz = bins.upper(bin);
    ++b.n_spins;
    if (!is_true_positive) ++b.n_false;
  }
  for (auto& [bin, b] : by_bin) {
    b.rate = static_cast<double>(b.n_false) / static_cast<double>(b.n_spins);
    report.bins.push_back(b);
  }
  return report;
}

double baseline_probability(long n_sites, long n_draw, long class_size, int occurrence) {
  if (class_size < 1 || class_size > n_sites) throw ValidationError("class_size must be in [1, n_sites]");
  if (n_draw < 0 || n_draw > n_sites) throw ValidationError("n_draw must be in [0, n_sites]");
  if (occurrence != 1 && occurrence != 2) throw ValidationError("occurrence must be 1 or 2");
  const double p0 = hypergeom_pmf(n_sites, n_draw, class_size, 0);
  if (occurrence == 1) return 1.0 - p0;
  return 1.0 - p0 - hypergeom_pmf(n_sites, n_draw, class_size, 1);
}

std::vector<int> plausible_sites(const PosteriorEnsemble& posterior, int n_sites, double threshold) {
  require_post_burn_in_samples(posterior);
  std::vector<long> occupancy(static_cast<std::size_t>(n_sites), 0);
  long n_samples = 0;
  for (const auto& rec : posterior.samples) {
    if (!posterior.is_post_burn_in(rec)) continue;
    ++n_samples;
    for (int site : rec.sites) ++occupancy[static_cast<std::size_t>(site)];
  }
  std::vector<int> out;
  for (int site = 0; site < n_sites; ++site) {
    const double freq = static_cast<double>(occupancy[static_cast<std::size_t>(site)]) / static_cast<double>(n_samples);
    if (freq > threshold) out.push_back(site);
  }
  return out;
}

Histogram lambda_histogram(const PosteriorEnsemble& posterior, int n_bins) {
  if (n_bins < 1) throw ValidationError("lambda histogram needs at least one bin");
  Histogram hist;
  hist.edges.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int i = 0; i <= n_bins; ++i) {
    hist.edges[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(n_bins);
  }
  hist.counts.assign(static_cast<std::size_t>(n_bins), 0);
  for (const auto& rec : posterior.samples) {
    if (!posterior.is_post_burn_in(rec)) continue;
    int bin = static_cast<int>(rec.lambda * n_bins);
    bin = std::clamp(bin, 0, n_bins - 1);
    ++hist.counts[static_cast<std::size_t>(bin)];
  }
  return hist;
}

double histogram_entropy(const Histogram& hist) {
  long total = 0;
  for (long c : hist.counts) total += c;
  if (total == 0) return 0.0;
  double entropy = 0.0;
  for (long c : hist.counts) {
    if (c > 0) {
      const double p = static_cast<double>(c) / static_cast<double>(total);
      entropy -= p * std::log(p);
    }
  }
  return entropy;
}

double histogram_mode_center(const Histogram& hist) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < hist.counts.size(); ++i) {
    if (hist.counts[i] > hist.counts[best]) best = i;
  }
  return 0.5 * (hist.edges[best] + hist.edges[best + 1]);
}

RecoveryReport build_report(const PosteriorEnsemble& posterior, const LatticeCatalog& catalog,
                            const std::optional<std::vector<int>>& truth_sites, const MagnitudeBins& bins,
                            int lambda_bins) {
  require_post_burn_in_samples(posterior);
  RecoveryReport report;
  report.magnitude_bins = bins;
  report.k_hist = k_histogram(posterior);
  report.k_modal = k_mode(report.k_hist);
  report.n_samples_post_burn_in = posterior.post_burn_in_count();
  report.lambda_posterior = lambda_histogram(posterior, lambda_bins);
  report.plausible = plausible_sites(posterior, catalog.n_sites());
  if (truth_sites) {
    report.discrepancy = dimension_discrepancy(posterior, static_cast<int>(truth_sites->size()));
    report.detections = detection_rate(posterior, catalog, *truth_sites);
    report.false_positives = false_positive_rate(posterior, catalog, *truth_sites, bins);
    for (const auto& d : report.detections) {
      auto& [sum, n] = report.detection_by_bin[bins.bin_of(d.magnitude_khz)];
      sum += d.rate;
      ++n;
    }
    for (auto& [bin, acc] : report.detection_by_bin) acc.first /= static_cast<double>(acc.second);
  }
  return report;
}

double effective_frequency_khz(double gamma_b_khz, double a_par_khz, double a_perp_khz) {
  return std::hypot(gamma_b_khz - a_par_khz, a_perp_khz);
}

std::vector<ComparisonRow> compare_to_reference(const PosteriorEnsemble& posterior, const LatticeCatalog& catalog,
                                                double gamma_b_khz, const std::vector<ReferenceRow>& rows) {
  require_post_burn_in_samples(posterior);

  // One representative (a_par, a_perp) per class, plus its effective frequency.
  std::vector<int> class_rep(static_cast<std::size_t>(catalog.n_classes()), -1);
  for (const auto& s : catalog.sites()) {
    if (class_rep[static_cast<std::size_t>(s.symmetry_class)] < 0) {
      class_rep[static_cast<std::size_t>(s.symmetry_class)] = s.site_id;
    }
  }

  // Posterior class-count frequencies: P(class appears >= copy times).
  long n_samples = 0;
  std::map<std::pair<int, int>, long> at_least;  // (class, copy) -> hits
  for (const auto& rec : posterior.samples) {
    if (!posterior.is_post_burn_in(rec)) continue;
    ++n_samples;
    for (const auto& [cls, count] : class_multiset(catalog, rec.sites)) {
      for (int copy = 1; copy <= count; ++copy) ++at_least[{cls, copy}];
    }
  }

  std::vector<ComparisonRow> out;
  std::map<int, int> claimed;
  for (const auto& row : rows) {
    int best_class = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int cls = 0; cls < catalog.n_classes(); ++cls) {
      const auto& rep = catalog.site(class_rep[static_cast<std::size_t>(cls)]);
      const double gap = std::abs(effective_frequency_khz(gamma_b_khz, rep.a_par_khz, rep.a_perp_khz) -
                                  row.a_minus_khz);
      if (gap < best_gap) {
        best_gap = gap;
        best_class = cls;
      }
    }
    const auto& rep = catalog.site(class_rep[static_cast<std::size_t>(best_class)]);
    const int copy = ++claimed[best_class];
    const auto it = at_least.find({best_class, copy});
    ComparisonRow c;
    c.label = row.label;
    c.a_minus_ref_khz = row.a_minus_khz;
    c.a_minus_rec_khz = effective_frequency_khz(gamma_b_khz, rep.a_par_khz, rep.a_perp_khz);
    c.a_par_khz = rep.a_par_khz;
    c.a_perp_khz = rep.a_perp_khz;
    c.detection_rate = it == at_least.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n_samples);
    out.push_back(c);
  }
  return out;
}

}  // namespace spinbath
