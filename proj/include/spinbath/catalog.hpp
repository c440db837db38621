#pragma once

#include <Eigen/Core>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace spinbath {

/// One candidate nuclear site: position in the defect frame (defect at the
/// origin, Angstrom) and its precomputed hyperfine pair in kHz.
struct LatticeSite {
  int site_id = -1;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double a_par_khz = 0.0;
  double a_perp_khz = 0.0;  // >= 0
  int symmetry_class = -1;
};

struct CatalogRow {
  double x = 0.0, y = 0.0, z = 0.0;
  double a_par_khz = 0.0;
  double a_perp_khz = 0.0;
};

/// Immutable discrete domain of candidate sites. Sites are filtered at
/// construction (|a_par| > cutoff or |a_perp| > cutoff), re-indexed densely,
/// grouped into symmetry classes by coupling equality after rounding to
/// `coupling_precision_khz`, and given a precomputed symmetric neighbor
/// index so the samplers never touch coordinates.
class LatticeCatalog {
 public:
  static constexpr double kDefaultCutoffKhz = 5.0;
  static constexpr double kDefaultNeighborRadius = 5.0;  // Angstrom
  static constexpr double kCouplingPrecisionKhz = 0.01;

  LatticeCatalog(std::vector<CatalogRow> rows, double cutoff_khz, double neighbor_radius_angstrom);

  /// Same sites and neighbor index, different couplings (classes recomputed).
  /// The cutoff filter is deliberately not re-applied so site ids stay
  /// aligned with the source catalog.
  LatticeCatalog with_couplings(const std::vector<std::pair<double, double>>& couplings_khz) const;

  int n_sites() const { return static_cast<int>(sites_.size()); }
  const LatticeSite& site(int id) const { return sites_.at(static_cast<std::size_t>(id)); }
  const std::vector<LatticeSite>& sites() const { return sites_; }

  std::span<const int> neighbors(int id) const {
    const auto& v = neighbors_.at(static_cast<std::size_t>(id));
    return {v.data(), v.size()};
  }

  int n_classes() const { return static_cast<int>(class_sizes_.size()); }
  int class_of(int id) const { return site(id).symmetry_class; }
  const std::vector<int>& class_sizes() const { return class_sizes_; }

  double coupling_magnitude_khz(int id) const {
    const auto& s = site(id);
    return std::hypot(s.a_par_khz, s.a_perp_khz);
  }

  double cutoff_khz() const { return cutoff_khz_; }
  double neighbor_radius() const { return neighbor_radius_; }

 private:
  LatticeCatalog() = default;

  void assign_classes();
  void build_neighbors();

  std::vector<LatticeSite> sites_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<int> class_sizes_;
  double cutoff_khz_ = kDefaultCutoffKhz;
  double neighbor_radius_ = kDefaultNeighborRadius;
};

/// Parse a delimited catalog file (header row required, `#` comments ignored,
/// columns x_angstrom, y_angstrom, z_angstrom, a_par_khz, a_perp_khz), apply
/// the magnitude cutoff and build the neighbor index.
LatticeCatalog load_catalog(const std::string& path, double cutoff_khz = LatticeCatalog::kDefaultCutoffKhz,
                            double neighbor_radius_angstrom = LatticeCatalog::kDefaultNeighborRadius);

/// neighbors(i) = { j != i : ||pos_i - pos_j|| <= radius }; symmetric by
/// construction. Exposed separately so radius sweeps don't rebuild catalogs.
std::vector<std::vector<int>> build_neighbor_index(const std::vector<LatticeSite>& sites, double radius_angstrom);

/// Multiplicity of every symmetry class; values sum to n_sites().
std::map<int, int> symmetry_class_sizes(const LatticeCatalog& catalog);

void write_catalog(const std::string& path, const LatticeCatalog& catalog);

}  // namespace spinbath
