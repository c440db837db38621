#include "spinbath/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string token;
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      if (!token.empty()) out.push_back(std::move(token));
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) out.push_back(std::move(token));
  return out;
}

double parse_double(const std::string& token, const std::string& path, std::size_t line_no) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + token + "'");
  }
  return value;
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

const char* kColumns[5] = {"x_angstrom", "y_angstrom", "z_angstrom", "a_par_khz", "a_perp_khz"};

}  // namespace

LatticeCatalog::LatticeCatalog(std::vector<CatalogRow> rows, double cutoff_khz, double neighbor_radius_angstrom) {
  if (cutoff_khz < 0.0) throw ValidationError("catalog cutoff must be >= 0 kHz");
  if (neighbor_radius_angstrom <= 0.0) throw ValidationError("neighbor radius must be > 0 Angstrom");
  cutoff_khz_ = cutoff_khz;
  neighbor_radius_ = neighbor_radius_angstrom;

  for (const auto& row : rows) {
    if (row.a_perp_khz < 0.0) throw ValidationError("a_perp must be >= 0 kHz");
    if (std::abs(row.a_par_khz) > cutoff_khz || std::abs(row.a_perp_khz) > cutoff_khz) {
      LatticeSite s;
      s.site_id = static_cast<int>(sites_.size());
      s.position = Eigen::Vector3d(row.x, row.y, row.z);
      s.a_par_khz = row.a_par_khz;
      s.a_perp_khz = row.a_perp_khz;
      sites_.push_back(s);
    }
  }
  if (sites_.empty()) throw ValidationError("catalog is empty after applying the cutoff filter");

  assign_classes();
  build_neighbors();
}

LatticeCatalog LatticeCatalog::with_couplings(const std::vector<std::pair<double, double>>& couplings_khz) const {
  if (couplings_khz.size() != sites_.size()) throw ValidationError("coupling list size does not match catalog");
  LatticeCatalog out;
  out.sites_ = sites_;
  out.neighbors_ = neighbors_;
  out.cutoff_khz_ = cutoff_khz_;
  out.neighbor_radius_ = neighbor_radius_;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    out.sites_[i].a_par_khz = couplings_khz[i].first;
    out.sites_[i].a_perp_khz = couplings_khz[i].second;
    if (out.sites_[i].a_perp_khz < 0.0) throw ValidationError("a_perp must be >= 0 kHz");
  }
  out.assign_classes();
  return out;
}

void LatticeCatalog::assign_classes() {
  // Exact-match grouping after rounding to the catalog precision.
  std::map<std::pair<long long, long long>, int> class_of_key;
  class_sizes_.clear();
  for (auto& s : sites_) {
    const std::pair<long long, long long> key{std::llround(s.a_par_khz / kCouplingPrecisionKhz),
                                              std::llround(s.a_perp_khz / kCouplingPrecisionKhz)};
    auto [it, inserted] = class_of_key.try_emplace(key, static_cast<int>(class_sizes_.size()));
    if (inserted) class_sizes_.push_back(0);
    s.symmetry_class = it->second;
    ++class_sizes_[static_cast<std::size_t>(it->second)];
  }
}

void LatticeCatalog::build_neighbors() { neighbors_ = build_neighbor_index(sites_, neighbor_radius_); }

std::vector<std::vector<int>> build_neighbor_index(const std::vector<LatticeSite>& sites, double radius_angstrom) {
  if (radius_angstrom <= 0.0) throw ValidationError("neighbor radius must be > 0 Angstrom");
  const int n = static_cast<int>(sites.size());
  std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(n));
  const double r2 = radius_angstrom * radius_angstrom;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (sites[static_cast<std::size_t>(i)].position - sites[static_cast<std::size_t>(j)].position).squaredNorm();
      if (d2 <= r2) {
        neighbors[static_cast<std::size_t>(i)].push_back(j);
        neighbors[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  return neighbors;
}

std::map<int, int> symmetry_class_sizes(const LatticeCatalog& catalog) {
  std::map<int, int> out;
  for (int c = 0; c < catalog.n_classes(); ++c) out[c] = catalog.class_sizes()[static_cast<std::size_t>(c)];
  return out;
}

LatticeCatalog load_catalog(const std::string& path, double cutoff_khz, double neighbor_radius_angstrom) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open catalog file: " + path);

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<CatalogRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto tokens = tokenize(line);
    if (!header_seen) {
      if (tokens.size() != 5) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": expected 5 header columns, got " +
                         std::to_string(tokens.size()));
      }
      for (int c = 0; c < 5; ++c) {
        if (tokens[static_cast<std::size_t>(c)] != kColumns[c]) {
          throw ParseError(path + ":" + std::to_string(line_no) + ": header column " + std::to_string(c + 1) +
                           " must be '" + kColumns[c] + "', got '" + tokens[static_cast<std::size_t>(c)] + "'");
        }
      }
      header_seen = true;
      continue;
    }
    if (tokens.size() != 5) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 5 columns, got " +
                       std::to_string(tokens.size()));
    }
    CatalogRow row;
    row.x = parse_double(tokens[0], path, line_no);
    row.y = parse_double(tokens[1], path, line_no);
    row.z = parse_double(tokens[2], path, line_no);
    row.a_par_khz = parse_double(tokens[3], path, line_no);
    row.a_perp_khz = parse_double(tokens[4], path, line_no);
    rows.push_back(row);
  }
  if (!header_seen) throw ParseError(path + ": empty catalog file (header row required)");
  if (rows.empty()) throw ParseError(path + ": catalog has a header but no site rows");
  return LatticeCatalog(std::move(rows), cutoff_khz, neighbor_radius_angstrom);
}

void write_catalog(const std::string& path, const LatticeCatalog& catalog) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open catalog file for writing: " + path);
  out << "x_angstrom,y_angstrom,z_angstrom,a_par_khz,a_perp_khz\n";
  char buf[160];
  for (const auto& s : catalog.sites()) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f\n", s.position.x(), s.position.y(), s.position.z(),
                  s.a_par_khz, s.a_perp_khz);
    out << buf;
  }
  if (!out) throw ParseError("failed while writing catalog: " + path);
}

}  // namespace spinbath
