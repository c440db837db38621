#include "spinbath/forward_model.hpp"

#include <cmath>

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

/// cos(n * phi) from cos(phi) by the Chebyshev recurrence, elementwise.
Eigen::ArrayXd chebyshev_cos_n(const Eigen::ArrayXd& cos_phi, int n) {
  if (n == 0) return Eigen::ArrayXd::Ones(cos_phi.size());
  if (n == 1) return cos_phi;
  Eigen::ArrayXd t_prev = Eigen::ArrayXd::Ones(cos_phi.size());
  Eigen::ArrayXd t_curr = cos_phi;
  Eigen::ArrayXd t_next(cos_phi.size());
  for (int k = 2; k <= n; ++k) {
    t_next = 2.0 * cos_phi * t_curr - t_prev;
    t_prev.swap(t_curr);
    t_curr.swap(t_next);
  }
  return t_curr;
}

Eigen::ArrayXd modulation_over(const Eigen::ArrayXd& tau_ms, double a_par_khz, double a_perp_khz,
                               const ExperimentSpec& spec) {
  if (a_perp_khz < 0.0) throw ValidationError("a_perp must be >= 0 kHz");
  if (a_perp_khz == 0.0) return Eigen::ArrayXd::Ones(tau_ms.size());  // m_x = 0 => M = 1 identically

  const double omega_l = larmor_rad_per_ms(spec);
  const double a_par = kTwoPi * a_par_khz;
  const double a_perp = kTwoPi * a_perp_khz;
  const double omega_tilde = std::hypot(a_par + omega_l, a_perp);
  const double m_z = (a_par + omega_l) / omega_tilde;
  const double m_x = a_perp / omega_tilde;

  const Eigen::ArrayXd alpha = omega_tilde * tau_ms;
  const Eigen::ArrayXd beta = omega_l * tau_ms;
  const Eigen::ArrayXd cos_a = alpha.cos();
  const Eigen::ArrayXd sin_a = alpha.sin();
  const Eigen::ArrayXd cos_b = beta.cos();
  const Eigen::ArrayXd sin_b = beta.sin();

  Eigen::ArrayXd cos_phi = cos_a * cos_b - m_z * sin_a * sin_b;
  cos_phi = cos_phi.cwiseMin(1.0).cwiseMax(-1.0);

  // sin^2(N phi / 2) = (1 - cos(N phi)) / 2 without ever taking acos.
  const Eigen::ArrayXd sin2_half = 0.5 * (1.0 - chebyshev_cos_n(cos_phi, spec.n_pulses));

  const Eigen::ArrayXd numerator = (m_x * m_x) * (1.0 - cos_a) * (1.0 - cos_b);
  const Eigen::ArrayXd denominator = 1.0 + cos_phi;

  // cos_phi = -1 makes the prefactor 0/0; its limit is the bound value 2.
  const Eigen::ArrayXd coeff = (denominator > 0.0).select(numerator / denominator, 2.0);
  Eigen::ArrayXd m = 1.0 - coeff * sin2_half;
  return m.cwiseMin(1.0).cwiseMax(-1.0);
}

}  // namespace

void ExperimentSpec::validate() const {
  if (n_pulses < 1) throw ValidationError("n_pulses must be >= 1");
  if (!(b_field_gauss > 0.0)) throw ValidationError("b_field must be > 0 G");
  if (gamma_n_khz_per_gauss == 0.0) throw ValidationError("gamma_n must be nonzero");
  if (tau_grid_ms.size() == 0) throw ValidationError("tau grid must be non-empty");
  for (Eigen::Index i = 0; i < tau_grid_ms.size(); ++i) {
    if (!(tau_grid_ms[i] > 0.0)) throw ValidationError("tau grid entries must be > 0 ms");
    if (i > 0 && !(tau_grid_ms[i] > tau_grid_ms[i - 1])) {
      throw ValidationError("tau grid must be strictly increasing");
    }
  }
}

SpinBath SpinBath::from_sites(const LatticeCatalog& catalog, std::span<const int> site_ids) {
  SpinBath bath;
  bath.couplings_khz.resize(static_cast<Eigen::Index>(site_ids.size()), 2);
  for (std::size_t i = 0; i < site_ids.size(); ++i) {
    const auto& s = catalog.site(site_ids[i]);
    bath.couplings_khz(static_cast<Eigen::Index>(i), 0) = s.a_par_khz;
    bath.couplings_khz(static_cast<Eigen::Index>(i), 1) = s.a_perp_khz;
  }
  return bath;
}

double larmor_rad_per_ms(const ExperimentSpec& spec) {
  return -spec.gamma_n_khz_per_gauss * kTwoPi * spec.b_field_gauss;
}

double spin_modulation(double a_par_khz, double a_perp_khz, const ExperimentSpec& spec, double tau_ms) {
  if (!(tau_ms > 0.0)) throw ValidationError("tau must be > 0 ms");
  Eigen::ArrayXd tau(1);
  tau[0] = tau_ms;
  return modulation_over(tau, a_par_khz, a_perp_khz, spec)[0];
}

Eigen::ArrayXd spin_modulation_grid(double a_par_khz, double a_perp_khz, const ExperimentSpec& spec) {
  return modulation_over(spec.tau_grid_ms, a_par_khz, a_perp_khz, spec);
}

Eigen::ArrayXd bath_modulation_product(const SpinBath& bath, const ExperimentSpec& spec) {
  Eigen::ArrayXd product = Eigen::ArrayXd::Ones(spec.tau_grid_ms.size());
  for (Eigen::Index i = 0; i < bath.size(); ++i) {
    product *= modulation_over(spec.tau_grid_ms, bath.couplings_khz(i, 0), bath.couplings_khz(i, 1), spec);
  }
  return product;
}

Eigen::ArrayXd coherence_from_product(const Eigen::ArrayXd& product, double lambda, const ExperimentSpec& spec,
                                      SignalMode mode) {
  const Eigen::ArrayXd base = 0.5 * (1.0 + product);
  if (mode == SignalMode::envelope) return base * (-spec.tau_grid_ms / lambda).exp();
  return (base.log() * (-spec.tau_grid_ms / lambda)).exp();
}

void throw_if_pole(const Eigen::ArrayXd& product, SignalMode mode) {
  if (mode == SignalMode::verbatim && (0.5 * (1.0 + product) <= 0.0).any()) {
    throw DomainError("coherence pole: modulation product reached -1 in verbatim mode");
  }
}

Eigen::ArrayXd coherence_signal(const SpinBath& bath, double lambda, const ExperimentSpec& spec, SignalMode mode) {
  spec.validate();
  if (!(lambda >= kLambdaMin && lambda <= 1.0)) throw ValidationError("lambda must be in [1e-6, 1]");
  const Eigen::ArrayXd product = bath_modulation_product(bath, spec);
  throw_if_pole(product, mode);
  return coherence_from_product(product, lambda, spec, mode);
}

}  // namespace spinbath
