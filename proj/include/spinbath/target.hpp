#pragma once

#include <Eigen/Core>

#include "spinbath/catalog.hpp"
#include "spinbath/chain_state.hpp"
#include "spinbath/forward_model.hpp"
#include "spinbath/likelihood.hpp"

namespace spinbath {

/// Binds catalog + experiment + data + likelihood into the score the kernels
/// sample from. All returned log-likelihoods are untempered; tempering is a
/// kernel concern. Non-finite model signals (the verbatim pole and overflow
/// at tiny lambda) score -inf rather than throwing, so proposals into those
/// regions are simply rejected.
class PosteriorTarget {
 public:
  PosteriorTarget(const LatticeCatalog& catalog, ExperimentSpec spec, ObservedSignal data, LikelihoodConfig lik,
                  SignalMode mode);

  /// Constant-likelihood target (score = 0 everywhere); the sampled
  /// distribution is then exactly the prior the kernels imply. Test hook for
  /// move-bookkeeping bias, never reachable from run configs.
  static PosteriorTarget flat(const LatticeCatalog& catalog);

  /// Recompute the modulation cache and log-likelihood from scratch.
  void refresh(ChainState& state) const;

  /// From-scratch score; does not touch the state's cache.
  double log_likelihood(const ChainState& state) const;

  struct ColEval {
    double log_lik;
    Eigen::ArrayXd col;
  };

  double eval_lambda(const ChainState& state, double new_lambda) const;
  ColEval eval_replace(const ChainState& state, int pos, int new_site) const;
  ColEval eval_birth(const ChainState& state, int new_site) const;
  double eval_death(const ChainState& state, int pos) const;

  /// Mean |model - data| residual of a state; +inf for non-finite signals.
  double mean_abs_error(const ChainState& state, bool squared = false) const;

  const LatticeCatalog& catalog() const { return *catalog_; }
  const ExperimentSpec& spec() const { return spec_; }
  const ObservedSignal& data() const { return data_; }
  const LikelihoodConfig& likelihood_config() const { return lik_; }
  SignalMode mode() const { return mode_; }
  bool is_flat() const { return flat_; }

 private:
  explicit PosteriorTarget(const LatticeCatalog& catalog);

  Eigen::ArrayXd site_column(int site_id) const;
  Eigen::ArrayXd product_excluding(const ChainState& state, int skip_pos) const;
  double score_product(const Eigen::ArrayXd& product, double lambda) const;
  Eigen::ArrayXd signal_from_product(const Eigen::ArrayXd& product, double lambda) const;

  const LatticeCatalog* catalog_;
  ExperimentSpec spec_;
  ObservedSignal data_;
  LikelihoodConfig lik_;
  SignalMode mode_ = SignalMode::verbatim;
  bool flat_ = false;
};

}  // namespace spinbath
