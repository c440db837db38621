#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <optional>
#include <vector>

namespace spinbath {

/// The state a chain evolves: an occupied-site configuration (sorted,
/// duplicate-free), the relative-decoherence parameter and cached likelihood
/// machinery. `mods` holds one modulation column per occupied site, aligned
/// with `sites`, so proposals only recompute the column they touch.
struct ChainState {
  std::vector<int> sites;
  double lambda = 1.0;
  std::optional<double> log_lik;
  Eigen::ArrayXXd mods;  // n_tau x k, column i belongs to sites[i]

  int k() const { return static_cast<int>(sites.size()); }

  bool occupies(int site_id) const { return std::binary_search(sites.begin(), sites.end(), site_id); }

  /// Swap sites[pos] for new_site (keeping order) and install its column.
  void apply_replace(int pos, int new_site, const Eigen::ArrayXd& new_col, double new_log_lik);
  void apply_birth(int new_site, const Eigen::ArrayXd& new_col, double new_log_lik);
  void apply_death(int pos, double new_log_lik);
};

}  // namespace spinbath
