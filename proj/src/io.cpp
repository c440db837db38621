#include "spinbath/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <sstream>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

using nlohmann::json;

json json_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  try {
    return json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void json_to_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw ParseError("failed while writing: " + path);
}

std::string spacing_name(TauSpacing spacing) { return spacing == TauSpacing::even ? "even" : "iid_uniform"; }

TauSpacing spacing_from_name(const std::string& name) {
  if (name == "even") return TauSpacing::even;
  if (name == "iid_uniform") return TauSpacing::iid_uniform;
  throw ParseError("unknown tau spacing '" + name + "'");
}

std::string mode_name(SignalMode mode) { return mode == SignalMode::verbatim ? "verbatim" : "envelope"; }

SignalMode mode_from_name(const std::string& name) {
  if (name == "verbatim") return SignalMode::verbatim;
  if (name == "envelope") return SignalMode::envelope;
  throw ParseError("unknown signal mode '" + name + "'");
}

}  // namespace

void write_signal(const std::string& path, const ObservedSignal& signal) {
  signal.validate();
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open signal file for writing: " + path);
  out << "tau_ms,coherence\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < signal.tau_ms.size(); ++i) {
    out << signal.tau_ms[i] << ',' << signal.values[i] << '\n';
  }
  if (!out) throw ParseError("failed while writing signal: " + path);
}

ObservedSignal read_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open signal file: " + path);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<double> tau, values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("tau_ms", 0) != 0) throw ParseError(path + ": missing 'tau_ms,coherence' header");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(path + ":" + std::to_string(line_no) + ": expected 2 columns");
    double t = 0.0, v = 0.0;
    const char* tb = line.data();
    auto r1 = std::from_chars(tb, tb + comma, t);
    auto r2 = std::from_chars(tb + comma + 1, tb + line.size(), v);
    if (r1.ec != std::errc() || r2.ec != std::errc()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": bad number");
    }
    tau.push_back(t);
    values.push_back(v);
  }
  if (tau.empty()) throw ParseError(path + ": signal file has no data rows");
  ObservedSignal signal;
  signal.tau_ms = Eigen::Map<Eigen::ArrayXd>(tau.data(), static_cast<Eigen::Index>(tau.size()));
  signal.values = Eigen::Map<Eigen::ArrayXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  signal.validate();
  return signal;
}

void write_manifest(const std::string& path, const Manifest& m) {
  json j;
  j["truth_sites"] = m.truth_sites;
  j["lambda_true"] = m.lambda_true;
  j["seed"] = m.seed;
  j["noise_sd"] = m.noise_sd;
  j["hyperfine_perturbation_khz"] = m.hyperfine_perturbation_khz;
  j["n_tau"] = m.n_tau;
  j["tau_max_ms"] = m.tau_max_ms;
  j["tau_spacing"] = spacing_name(m.spacing);
  j["signal_mode"] = mode_name(m.mode);
  j["n_pulses"] = m.n_pulses;
  j["b_field_gauss"] = m.b_field_gauss;
  j["gamma_n_khz_per_gauss"] = m.gamma_n_khz_per_gauss;
  json_to_file(path, j);
}

Manifest read_manifest(const std::string& path) {
  const json j = json_from_file(path);
  Manifest m;
  try {
    m.truth_sites = j.at("truth_sites").get<std::vector<int>>();
    m.lambda_true = j.at("lambda_true").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.noise_sd = j.at("noise_sd").get<double>();
    m.hyperfine_perturbation_khz = j.at("hyperfine_perturbation_khz").get<double>();
    m.n_tau = j.at("n_tau").get<int>();
    m.tau_max_ms = j.at("tau_max_ms").get<double>();
    m.spacing = spacing_from_name(j.at("tau_spacing").get<std::string>());
    m.mode = mode_from_name(j.at("signal_mode").get<std::string>());
    m.n_pulses = j.at("n_pulses").get<int>();
    m.b_field_gauss = j.at("b_field_gauss").get<double>();
    m.gamma_n_khz_per_gauss = j.at("gamma_n_khz_per_gauss").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return m;
}

SyntheticScenario scenario_from_manifest(const Manifest& m) {
  SyntheticScenario s;
  s.truth_sites = m.truth_sites;
  s.lambda_true = m.lambda_true;
  s.noise_sd = m.noise_sd;
  s.hyperfine_perturbation_khz = m.hyperfine_perturbation_khz;
  s.n_tau = m.n_tau;
  s.tau_max_ms = m.tau_max_ms;
  s.spacing = m.spacing;
  s.mode = m.mode;
  s.spec.n_pulses = m.n_pulses;
  s.spec.b_field_gauss = m.b_field_gauss;
  s.spec.gamma_n_khz_per_gauss = m.gamma_n_khz_per_gauss;
  return s;
}

std::string record_to_line(const SampleRecord& record) {
  json j;
  j["ensemble"] = record.ensemble;
  j["step"] = record.step;
  j["k"] = record.k();
  j["lambda"] = record.lambda;
  j["site_ids"] = record.sites;
  j["loglik"] = std::isfinite(record.log_lik) ? json(record.log_lik) : json("-inf");
  return j.dump();
}

void write_posterior(const std::string& path, const PosteriorEnsemble& posterior) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open posterior file for writing: " + path);
  for (const auto& rec : posterior.samples) out << record_to_line(rec) << '\n';
  if (!out) throw ParseError("failed while writing posterior: " + path);
}

PosteriorEnsemble read_posterior(const std::string& path, long burn_in) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open posterior file: " + path);
  PosteriorEnsemble posterior;
  posterior.burn_in = burn_in;
  std::string line;
  std::size_t line_no = 0;
  int max_ensemble = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      SampleRecord rec;
      rec.ensemble = j.at("ensemble").get<int>();
      rec.step = j.at("step").get<long>();
      rec.lambda = j.at("lambda").get<double>();
      rec.sites = j.at("site_ids").get<std::vector<int>>();
      const auto& ll = j.at("loglik");
      rec.log_lik = ll.is_string() ? -std::numeric_limits<double>::infinity() : ll.get<double>();
      if (j.at("k").get<int>() != rec.k()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": k does not match site_ids length");
      }
      max_ensemble = std::max(max_ensemble, rec.ensemble);
      posterior.samples.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (posterior.samples.empty()) throw ParseError(path + ": no posterior records");
  posterior.n_ensembles = max_ensemble + 1;
  posterior.stats.resize(static_cast<std::size_t>(posterior.n_ensembles));
  return posterior;
}

void write_report(const std::string& path, const RecoveryReport& report, const LatticeCatalog& catalog) {
  json j;
  j["n_samples_post_burn_in"] = report.n_samples_post_burn_in;
  j["k_mode"] = report.k_modal;
  json hist = json::object();
  for (const auto& [k, count] : report.k_hist) hist[std::to_string(k)] = count;
  j["k_histogram"] = hist;
  if (report.discrepancy) j["dimension_discrepancy"] = *report.discrepancy;
  j["magnitude_bin_edges_khz"] = report.magnitude_bins.edges;

  json detections = json::array();
  for (const auto& d : report.detections) {
    detections.push_back({{"truth_site", d.truth_site},
                          {"symmetry_class", d.symmetry_class},
                          {"copy_index", d.copy_index},
                          {"a_par_khz", d.a_par_khz},
                          {"a_perp_khz", d.a_perp_khz},
                          {"magnitude_khz", d.magnitude_khz},
                          {"rate", d.rate}});
  }
  j["detections"] = detections;

  json det_bins = json::array();
  for (const auto& [bin, acc] : report.detection_by_bin) {
    det_bins.push_back({{"bin", report.magnitude_bins.label(bin)},
                        {"lo_khz", report.magnitude_bins.lower(bin)},
                        {"mean_rate", acc.first},
                        {"n_truth_spins", acc.second}});
  }
  j["detection_by_magnitude"] = det_bins;

  json fp = json::object();
  fp["modal_k"] = report.false_positives.modal_k;
  fp["modal_config"] = report.false_positives.modal_config;
  json fp_bins = json::array();
  for (const auto& b : report.false_positives.bins) {
    fp_bins.push_back(
        {{"lo_khz", b.lo_khz},
         {"hi_khz", std::isfinite(b.hi_khz) ? json(b.hi_khz) : json("inf")},
         {"n_spins", b.n_spins},
         {"n_false", b.n_false},
         {"rate", b.rate}});
  }
  fp["bins"] = fp_bins;
  if (!report.detections.empty()) j["false_positives"] = fp;

  j["lambda_histogram"] = {{"edges", report.lambda_posterior.edges}, {"counts", report.lambda_posterior.counts}};
  j["plausible_sites"] = report.plausible;
  j["n_plausible"] = report.plausible.size();
  j["n_catalog_sites"] = catalog.n_sites();
  json_to_file(path, j);
}

void write_error_trace(const std::string& path, const std::vector<ErrorTracePoint>& trace) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open error trace for writing: " + path);
  out << "ensemble,step,error\n";
  out.precision(17);
  for (const auto& p : trace) out << p.ensemble << ',' << p.step << ',' << p.error << '\n';
  if (!out) throw ParseError("failed while writing error trace: " + path);
}

std::vector<ReferenceRow> read_reference_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open reference table: " + path);
  std::vector<ReferenceRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("label", 0) != 0) throw ParseError(path + ": missing 'label,a_minus_khz' header");
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string token;
    std::vector<std::string> tokens;
    while (std::getline(ss, token, ',')) tokens.push_back(token);
    if (tokens.size() != 2 && tokens.size() != 4) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 2 or 4 columns");
    }
    ReferenceRow row;
    row.label = tokens[0];
    try {
      row.a_minus_khz = std::stod(tokens[1]);
      if (tokens.size() == 4) {
        row.a_par_khz = std::stod(tokens[2]);
        row.a_perp_khz = std::stod(tokens[3]);
      }
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": bad number");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError(path + ": reference table has no rows");
  return rows;
}

void write_comparison(const std::string& path, const std::vector<ComparisonRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open comparison file for writing: " + path);
  out << "label,a_minus_ref_khz,a_minus_rec_khz,a_par_khz,a_perp_khz,detection_rate\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.label << ',' << r.a_minus_ref_khz << ',' << r.a_minus_rec_khz << ',' << r.a_par_khz << ','
        << r.a_perp_khz << ',' << r.detection_rate << '\n';
  }
  if (!out) throw ParseError("failed while writing comparison: " + path);
}

}  // namespace spinbath
