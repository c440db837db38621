#include "spinbath/target.hpp"

#include <cmath>
#include <limits>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

PosteriorTarget::PosteriorTarget(const LatticeCatalog& catalog, ExperimentSpec spec, ObservedSignal data,
                                 LikelihoodConfig lik, SignalMode mode)
    : catalog_(&catalog), spec_(std::move(spec)), data_(std::move(data)), lik_(lik), mode_(mode) {
  spec_.validate();
  data_.validate();
  lik_.validate();
  if (spec_.tau_grid_ms.size() != data_.tau_ms.size() ||
      ((spec_.tau_grid_ms - data_.tau_ms).abs() > 0.0).any()) {
    throw ValidationError("experiment tau grid must match the observed signal's tau grid");
  }
}

PosteriorTarget::PosteriorTarget(const LatticeCatalog& catalog) : catalog_(&catalog), flat_(true) {
  // Dummy one-point grid keeps the cache machinery uniform for flat targets.
  spec_.tau_grid_ms = Eigen::ArrayXd::Constant(1, 1.0);
  data_.tau_ms = spec_.tau_grid_ms;
  data_.values = Eigen::ArrayXd::Ones(1);
}

PosteriorTarget PosteriorTarget::flat(const LatticeCatalog& catalog) { return PosteriorTarget(catalog); }

Eigen::ArrayXd PosteriorTarget::site_column(int site_id) const {
  const auto& s = catalog_->site(site_id);
  return spin_modulation_grid(s.a_par_khz, s.a_perp_khz, spec_);
}

Eigen::ArrayXd PosteriorTarget::product_excluding(const ChainState& state, int skip_pos) const {
  Eigen::ArrayXd product = Eigen::ArrayXd::Ones(spec_.tau_grid_ms.size());
  for (int c = 0; c < state.k(); ++c) {
    if (c != skip_pos) product *= state.mods.col(c);
  }
  return product;
}

Eigen::ArrayXd PosteriorTarget::signal_from_product(const Eigen::ArrayXd& product, double lambda) const {
  return coherence_from_product(product, lambda, spec_, mode_);
}

double PosteriorTarget::score_product(const Eigen::ArrayXd& product, double lambda) const {
  if (flat_) return 0.0;
  const Eigen::ArrayXd model = signal_from_product(product, lambda);
  if (!model.isFinite().all()) return kNegInf;
  return spinbath::log_likelihood(data_, model, lik_);
}

void PosteriorTarget::refresh(ChainState& state) const {
  state.mods.resize(spec_.tau_grid_ms.size(), state.k());
  for (int c = 0; c < state.k(); ++c) state.mods.col(c) = site_column(state.sites[static_cast<std::size_t>(c)]);
  state.log_lik = score_product(product_excluding(state, -1), state.lambda);
}

double PosteriorTarget::log_likelihood(const ChainState& state) const {
  SpinBath bath = SpinBath::from_sites(*catalog_, state.sites);
  return score_product(bath_modulation_product(bath, spec_), state.lambda);
}

double PosteriorTarget::eval_lambda(const ChainState& state, double new_lambda) const {
  return score_product(product_excluding(state, -1), new_lambda);
}

PosteriorTarget::ColEval PosteriorTarget::eval_replace(const ChainState& state, int pos, int new_site) const {
  ColEval out{0.0, site_column(new_site)};
  out.log_lik = score_product(product_excluding(state, pos) * out.col, state.lambda);
  return out;
}

PosteriorTarget::ColEval PosteriorTarget::eval_birth(const ChainState& state, int new_site) const {
  ColEval out{0.0, site_column(new_site)};
  out.log_lik = score_product(product_excluding(state, -1) * out.col, state.lambda);
  return out;
}

double PosteriorTarget::eval_death(const ChainState& state, int pos) const {
  return score_product(product_excluding(state, pos), state.lambda);
}

double PosteriorTarget::mean_abs_error(const ChainState& state, bool squared) const {
  if (flat_) return 0.0;
  SpinBath bath = SpinBath::from_sites(*catalog_, state.sites);
  const Eigen::ArrayXd model = signal_from_product(bath_modulation_product(bath, spec_), state.lambda);
  if (!model.isFinite().all()) return std::numeric_limits<double>::infinity();
  const Eigen::ArrayXd resid = (model - data_.values).abs();
  return squared ? resid.square().mean() : resid.mean();
}

}  // namespace spinbath
