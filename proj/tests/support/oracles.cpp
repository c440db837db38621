#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spinbath/rng.hpp"

namespace spinbath::testing {

double oracle_modulation(double a_par_khz, double a_perp_khz, int n_pulses, double b_field_gauss,
                         double gamma_n_khz_per_gauss, double tau_ms) {
  const double two_pi = 2.0 * M_PI;
  const double omega_l = -gamma_n_khz_per_gauss * b_field_gauss * two_pi;  // rad/ms
  const double a_par = a_par_khz * two_pi;
  const double a_perp = a_perp_khz * two_pi;
  if (a_perp == 0.0) return 1.0;

  const double omega_tilde = std::sqrt((a_par + omega_l) * (a_par + omega_l) + a_perp * a_perp);
  const double m_z = (a_par + omega_l) / omega_tilde;
  const double m_x = a_perp / omega_tilde;
  const double alpha = omega_tilde * tau_ms;
  const double beta = omega_l * tau_ms;

  double cos_phi = std::cos(alpha) * std::cos(beta) - m_z * std::sin(alpha) * std::sin(beta);
  cos_phi = std::min(1.0, std::max(-1.0, cos_phi));
  const double phi = std::acos(cos_phi);
  const double s = std::sin(static_cast<double>(n_pulses) * phi / 2.0);
  const double numerator = m_x * m_x * (1.0 - std::cos(alpha)) * (1.0 - std::cos(beta));
  return 1.0 - numerator / (1.0 + cos_phi) * s * s;
}

std::vector<double> oracle_signal(const std::vector<std::pair<double, double>>& couplings_khz, double lambda,
                                  int n_pulses, double b_field_gauss, double gamma_n_khz_per_gauss,
                                  const std::vector<double>& tau_ms, bool envelope_mode) {
  std::vector<double> out;
  out.reserve(tau_ms.size());
  for (double tau : tau_ms) {
    double product = 1.0;
    for (const auto& [a_par, a_perp] : couplings_khz) {
      product *= oracle_modulation(a_par, a_perp, n_pulses, b_field_gauss, gamma_n_khz_per_gauss, tau);
    }
    const double base = 0.5 * (1.0 + product);
    if (envelope_mode) {
      out.push_back(base * std::exp(-tau / lambda));
    } else {
      out.push_back(std::pow(base, -tau / lambda));
    }
  }
  return out;
}

namespace {

/// Minimal two-phase tableau simplex for min c'x st Ax = b, x >= 0, with
/// Bland's anti-cycling rule. b must be nonnegative.
class Simplex {
 public:
  Simplex(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), m_(a_.size()), n_(c_.size()) {}

  double solve() {
    // Phase 1: artificials with unit cost.
    std::vector<std::vector<double>> tab(m_, std::vector<double>(n_ + m_ + 1, 0.0));
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) tab[i][j] = a_[i][j];
      tab[i][n_ + i] = 1.0;
      tab[i].back() = b_[i];
      basis_[i] = n_ + i;
    }
    std::vector<double> phase1_cost(n_ + m_, 0.0);
    for (std::size_t j = n_; j < n_ + m_; ++j) phase1_cost[j] = 1.0;
    const double infeasibility = optimize(tab, phase1_cost, n_ + m_);
    if (infeasibility > 1e-9) throw std::runtime_error("transport LP infeasible");

    // Phase 2: original costs; artificial columns may stay basic at zero but
    // never re-enter.
    std::vector<double> phase2_cost(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) phase2_cost[j] = c_[j];
    return optimize(tab, phase2_cost, n_);
  }

 private:
  double optimize(std::vector<std::vector<double>>& tab, const std::vector<double>& cost, std::size_t n_enterable) {
    constexpr double kEps = 1e-11;
    for (;;) {
      // Reduced costs via the basic-cost multipliers.
      std::vector<double> y(m_);
      for (std::size_t i = 0; i < m_; ++i) y[i] = cost[basis_[i]];
      std::size_t entering = n_ + m_;
      for (std::size_t j = 0; j < n_enterable; ++j) {
        double reduced = cost[j];
        for (std::size_t i = 0; i < m_; ++i) reduced -= y[i] * tab[i][j];
        if (reduced < -kEps) {
          entering = j;  // Bland: smallest index
          break;
        }
      }
      if (entering == n_ + m_) break;

      std::size_t leaving = m_;
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (tab[i][entering] > kEps) {
          const double ratio = tab[i].back() / tab[i][entering];
          if (leaving == m_ || ratio < best_ratio - kEps ||
              (std::abs(ratio - best_ratio) <= kEps && basis_[i] < basis_[leaving])) {
            leaving = i;
            best_ratio = ratio;
          }
        }
      }
      if (leaving == m_) throw std::runtime_error("transport LP unbounded");

      const double pivot = tab[leaving][entering];
      for (auto& v : tab[leaving]) v /= pivot;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == leaving) continue;
        const double factor = tab[i][entering];
        if (factor != 0.0) {
          for (std::size_t j = 0; j <= n_ + m_; ++j) tab[i][j] -= factor * tab[leaving][j];
        }
      }
      basis_[leaving] = entering;
    }
    double value = 0.0;
    for (std::size_t i = 0; i < m_; ++i) value += cost[basis_[i]] * tab[i].back();
    return value;
  }

  std::vector<std::vector<double>> a_;
  std::vector<double> b_;
  std::vector<double> c_;
  std::size_t m_, n_;
  std::vector<std::size_t> basis_;
};

}  // namespace

double oracle_transport_w2sq(const std::vector<double>& x, const std::vector<double>& p,
                             const std::vector<double>& y, const std::vector<double>& q) {
  const std::size_t n = x.size(), m = y.size();
  std::vector<std::vector<double>> a(n + m, std::vector<double>(n * m, 0.0));
  std::vector<double> b(n + m, 0.0);
  std::vector<double> cost(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      a[i][i * m + j] = 1.0;
      a[n + j][i * m + j] = 1.0;
      cost[i * m + j] = (x[i] - y[j]) * (x[i] - y[j]);
    }
    b[i] = p[i];
  }
  for (std::size_t j = 0; j < m; ++j) b[n + j] = q[j];
  return Simplex(std::move(a), std::move(b), std::move(cost)).solve();
}

std::pair<double, double> mc_hypergeometric_tail(long n_sites, long n_draw, long class_size, int occurrence,
                                                 long n_trials, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<int> pool(static_cast<std::size_t>(n_sites));
  long hits = 0;
  for (long t = 0; t < n_trials; ++t) {
    std::iota(pool.begin(), pool.end(), 0);
    int marked = 0;
    for (long d = 0; d < n_draw; ++d) {
      const auto j = d + static_cast<long>(rng.uniform_below(static_cast<std::uint64_t>(n_sites - d)));
      std::swap(pool[static_cast<std::size_t>(d)], pool[static_cast<std::size_t>(j)]);
      if (pool[static_cast<std::size_t>(d)] < class_size) ++marked;
    }
    if (marked >= occurrence) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_trials);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n_trials));
  return {p, se};
}

EnumeratedPosterior enumerate_posterior(const PosteriorTarget& target, double lambda, int k_max) {
  const int n = target.catalog().n_sites();
  std::vector<std::vector<int>> configs;
  std::vector<int> current;
  // All subsets of size <= k_max, in lexicographic order.
  const std::function<void(int)> recurse = [&](int next) {
    configs.push_back(current);
    if (static_cast<int>(current.size()) == k_max) return;
    for (int s = next; s < n; ++s) {
      current.push_back(s);
      recurse(s + 1);
      current.pop_back();
    }
  };
  recurse(0);

  std::vector<double> loglik;
  loglik.reserve(configs.size());
  double max_ll = -std::numeric_limits<double>::infinity();
  for (const auto& config : configs) {
    ChainState state;
    state.sites = config;
    state.lambda = lambda;
    const double ll = target.log_likelihood(state);
    loglik.push_back(ll);
    max_ll = std::max(max_ll, ll);
  }
  double total = 0.0;
  for (double ll : loglik) total += std::exp(ll - max_ll);

  EnumeratedPosterior out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out.prob[configs[i]] = std::exp(loglik[i] - max_ll) / total;
  }
  return out;
}

double total_variation(const EnumeratedPosterior& exact, const std::map<std::vector<int>, long>& counts) {
  long total = 0;
  for (const auto& [config, count] : counts) total += count;
  double tv = 0.0;
  for (const auto& [config, p] : exact.prob) {
    const auto it = counts.find(config);
    const double q = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
    tv += std::abs(p - q);
  }
  for (const auto& [config, count] : counts) {
    if (!exact.prob.count(config)) tv += static_cast<double>(count) / static_cast<double>(total);
  }
  return 0.5 * tv;
}

std::map<std::vector<int>, long> config_counts(const PosteriorEnsemble& posterior) {
  std::map<std::vector<int>, long> counts;
  for (const auto& rec : posterior.samples) {
    if (posterior.is_post_burn_in(rec)) ++counts[rec.sites];
  }
  return counts;
}

}  // namespace spinbath::testing
