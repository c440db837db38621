#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spinbath/catalog.hpp"
#include "spinbath/forward_model.hpp"

namespace spinbath::testing {

/// Carbon sites of a diamond lattice between `inner_radius` and `radius` of
/// the origin with point-dipole hyperfine couplings about a [111] defect
/// axis. Stands in for the precomputed ab initio catalog the samplers ingest
/// in production; the C3v symmetry of the axis yields genuine multi-site
/// coupling classes. The innermost shells are excluded: their couplings are
/// contact-dominated and outside the point-dipole model.
std::vector<CatalogRow> diamond_point_dipole_rows(double radius_angstrom, double inner_radius_angstrom = 2.8);

LatticeCatalog diamond_catalog(double radius_angstrom = 8.2, double cutoff_khz = 5.0,
                               double neighbor_radius = 5.0, double inner_radius_angstrom = 2.8);

/// n sites on a line with `spacing` between adjacent sites; couplings given
/// per site. With neighbor_radius between spacing and 2*spacing this is the
/// path graph.
LatticeCatalog line_catalog(const std::vector<std::pair<double, double>>& couplings_khz, double spacing = 1.0,
                            double neighbor_radius = 1.5, double cutoff_khz = 0.0);

/// Six sites, all mutually within the neighbor radius, couplings spread over
/// a few tens of kHz; the standard small enumeration problem.
LatticeCatalog six_site_catalog();

/// RAII temporary directory under the system temp path.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Write catalog rows as a spec-format file (header + CSV rows).
void write_catalog_rows(const std::string& path, const std::vector<CatalogRow>& rows);

}  // namespace spinbath::testing
