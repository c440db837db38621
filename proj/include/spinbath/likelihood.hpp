#pragma once

#include <Eigen/Core>

namespace spinbath {

enum class LikelihoodMode { gaussian, wasserstein_mixed };

struct LikelihoodConfig {
  double sigma2 = 0.1;  // noise-variance hyperparameter
  double zeta = 0.0;    // W2 weight, only read in wasserstein_mixed mode
  LikelihoodMode mode = LikelihoodMode::gaussian;

  void validate() const;
};

/// Measured (or synthetic) coherence readings over a strictly increasing tau
/// grid in ms.
struct ObservedSignal {
  Eigen::ArrayXd tau_ms;
  Eigen::ArrayXd values;

  void validate() const;
};

/// log L = -(1 / 2 sigma^2) * sum_i (d_i - f_i)^2  (unnormalized).
double log_likelihood_gaussian(const ObservedSignal& data, const Eigen::ArrayXd& model, const LikelihoodConfig& cfg);

/// Both signals are mapped to probability vectors over the tau support
/// (min-shift then divide by the sum; a constant signal maps to the uniform
/// distribution) and compared by exact discrete quantile matching. Units ms^2.
double w2_squared(const ObservedSignal& data, const Eigen::ArrayXd& model);

/// Sampler-facing score. gaussian mode: the Gaussian log-likelihood.
/// wasserstein_mixed: (1 - zeta) * gaussian - zeta * W2^2, the log-space
/// composition; zeta = 0 reduces to gaussian mode bit-for-bit.
double log_likelihood(const ObservedSignal& data, const Eigen::ArrayXd& model, const LikelihoodConfig& cfg);

/// The mixed form evaluated literally in probability space,
/// (1 - zeta) * exp(gaussian) - zeta * W2^2. Can be negative; reporting only,
/// never consumed by the samplers.
double literal_mixed_likelihood(const ObservedSignal& data, const Eigen::ArrayXd& model, const LikelihoodConfig& cfg);

/// Min-shift + normalize helper used by w2_squared; exposed for tests.
Eigen::ArrayXd normalize_to_distribution(const Eigen::ArrayXd& signal);

/// Exact squared 2-Wasserstein distance between two discrete distributions on
/// a shared sorted support.
double w2_squared_distributions(const Eigen::ArrayXd& support, const Eigen::ArrayXd& p, const Eigen::ArrayXd& q);

}  // namespace spinbath
