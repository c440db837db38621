#include "spinbath/likelihood.hpp"

#include <cmath>

#include "spinbath/errors.hpp"

namespace spinbath {

void LikelihoodConfig::validate() const {
  if (!(sigma2 > 0.0)) throw ValidationError("sigma2 must be > 0");
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw ValidationError("zeta must be in [0, 1]");
}

void ObservedSignal::validate() const {
  if (tau_ms.size() != values.size()) throw ValidationError("signal tau grid and values differ in length");
  if (tau_ms.size() == 0) throw ValidationError("signal is empty");
  for (Eigen::Index i = 0; i < tau_ms.size(); ++i) {
    if (!(tau_ms[i] > 0.0)) throw ValidationError("signal tau entries must be > 0 ms");
    if (i > 0 && !(tau_ms[i] > tau_ms[i - 1])) throw ValidationError("signal tau grid must be strictly increasing");
  }
}

double log_likelihood_gaussian(const ObservedSignal& data, const Eigen::ArrayXd& model, const LikelihoodConfig& cfg) {
  cfg.validate();
  if (model.size() != data.values.size()) throw ValidationError("model and data lengths differ");
  return -0.5 / cfg.sigma2 * (data.values - model).square().sum();
}

Eigen::ArrayXd normalize_to_distribution(const Eigen::ArrayXd& signal) {
  const Eigen::ArrayXd shifted = signal - signal.minCoeff();
  const double total = shifted.sum();
  if (total > 0.0) return shifted / total;
  // Constant signal: no mass structure, use the uniform distribution.
  return Eigen::ArrayXd::Constant(signal.size(), 1.0 / static_cast<double>(signal.size()));
}

double w2_squared_distributions(const Eigen::ArrayXd& support, const Eigen::ArrayXd& p, const Eigen::ArrayXd& q) {
  const Eigen::Index n = support.size();
  if (p.size() != n || q.size() != n) throw ValidationError("distribution lengths differ from support");
  // Walk the two CDFs jointly; between breakpoints both quantile functions
  // are constant, so the integral is a finite sum.
  double total = 0.0;
  Eigen::Index i = 0, j = 0;
  double cum_p = p[0], cum_q = q[0];
  double u_prev = 0.0;
  while (i < n && j < n) {
    const double u_next = std::min(cum_p, cum_q);
    const double diff = support[i] - support[j];
    const double width = u_next - u_prev;
    if (width > 0.0) total += width * diff * diff;
    u_prev = u_next;
    if (cum_p <= cum_q) {
      ++i;
      if (i < n) cum_p += p[i];
    } else {
      ++j;
      if (j < n) cum_q += q[j];
    }
  }
  return total;
}

double w2_squared(const ObservedSignal& data, const Eigen::ArrayXd& model) {
  data.validate();
  if (model.size() != data.values.size()) throw ValidationError("model and data lengths differ");
  const Eigen::ArrayXd p = normalize_to_distribution(data.values);
  const Eigen::ArrayXd q = normalize_to_distribution(model);
  return w2_squared_distributions(data.tau_ms, p, q);
}

double log_likelihood(const ObservedSignal& data, const Eigen::ArrayXd& model, const LikelihoodConfig& cfg) {
  cfg.validate();
  if (cfg.mode == LikelihoodMode::gaussian || cfg.zeta == 0.0) {
    return log_likelihood_gaussian(data, model, cfg);
  }
  return (1.0 - cfg.zeta) * log_likelihood_gaussian(data, model, cfg) - cfg.zeta * w2_squared(data, model);
}

double literal_mixed_likelihood(const ObservedSignal& data, const Eigen::ArrayXd& model, const LikelihoodConfig& cfg) {
  cfg.validate();
  return (1.0 - cfg.zeta) * std::exp(log_likelihood_gaussian(data, model, cfg)) - cfg.zeta * w2_squared(data, model);
}

}  // namespace spinbath
