#include "fixtures.hpp"

#include <atomic>
#include <unistd.h>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace spinbath::testing {

namespace {
constexpr double kLatticeConstant = 3.567;        // diamond conventional cell, Angstrom
constexpr double kDipolePrefactor = 19884.0;      // kHz * Angstrom^3 for an NV-13C pair
}  // namespace

std::vector<CatalogRow> diamond_point_dipole_rows(double radius_angstrom, double inner_radius_angstrom) {
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  const double axis[3] = {inv_sqrt3, inv_sqrt3, inv_sqrt3};  // defect axis along [111]

  const double fcc[4][3] = {{0, 0, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}};
  const double basis[2][3] = {{0, 0, 0}, {0.25, 0.25, 0.25}};

  std::vector<CatalogRow> rows;
  const int span = static_cast<int>(std::ceil(radius_angstrom / kLatticeConstant)) + 1;
  for (int cx = -span; cx <= span; ++cx) {
    for (int cy = -span; cy <= span; ++cy) {
      for (int cz = -span; cz <= span; ++cz) {
        for (const auto& f : fcc) {
          for (const auto& b : basis) {
            const double x = (cx + f[0] + b[0]) * kLatticeConstant;
            const double y = (cy + f[1] + b[1]) * kLatticeConstant;
            const double z = (cz + f[2] + b[2]) * kLatticeConstant;
            const double r = std::sqrt(x * x + y * y + z * z);
            if (r < inner_radius_angstrom || r > radius_angstrom) continue;
            const double cos_t = (x * axis[0] + y * axis[1] + z * axis[2]) / r;
            const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
            const double scale = kDipolePrefactor / (r * r * r);
            CatalogRow row;
            row.x = x;
            row.y = y;
            row.z = z;
            row.a_par_khz = scale * (3.0 * cos_t * cos_t - 1.0);
            row.a_perp_khz = scale * 3.0 * std::abs(sin_t * cos_t);
            rows.push_back(row);
          }
        }
      }
    }
  }
  return rows;
}

LatticeCatalog diamond_catalog(double radius_angstrom, double cutoff_khz, double neighbor_radius,
                               double inner_radius_angstrom) {
  return LatticeCatalog(diamond_point_dipole_rows(radius_angstrom, inner_radius_angstrom), cutoff_khz,
                        neighbor_radius);
}

LatticeCatalog line_catalog(const std::vector<std::pair<double, double>>& couplings_khz, double spacing,
                            double neighbor_radius, double cutoff_khz) {
  std::vector<CatalogRow> rows;
  for (std::size_t i = 0; i < couplings_khz.size(); ++i) {
    CatalogRow row;
    row.x = spacing * static_cast<double>(i);
    row.a_par_khz = couplings_khz[i].first;
    row.a_perp_khz = couplings_khz[i].second;
    rows.push_back(row);
  }
  return LatticeCatalog(std::move(rows), cutoff_khz, neighbor_radius);
}

LatticeCatalog six_site_catalog() {
  // Couplings chosen to give distinct, moderate likelihood structure.
  std::vector<CatalogRow> rows;
  const double couplings[6][2] = {{40, 12}, {-35, 20}, {25, 30}, {-15, 8}, {55, 5}, {10, 45}};
  for (int i = 0; i < 6; ++i) {
    CatalogRow row;
    row.x = 0.3 * i;  // everyone within the neighbor radius of everyone
    row.a_par_khz = couplings[i][0];
    row.a_perp_khz = couplings[i][1];
    rows.push_back(row);
  }
  return LatticeCatalog(std::move(rows), 0.0, 5.0);
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("spinbath_test_" + tag + "_" + std::to_string(counter.fetch_add(1)) + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_catalog_rows(const std::string& path, const std::vector<CatalogRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "x_angstrom,y_angstrom,z_angstrom,a_par_khz,a_perp_khz\n";
  out.precision(12);
  for (const auto& r : rows) {
    out << r.x << ',' << r.y << ',' << r.z << ',' << r.a_par_khz << ',' << r.a_perp_khz << '\n';
  }
}

}  // namespace spinbath::testing
