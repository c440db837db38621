#pragma once

#include <Eigen/Core>
#include <span>

#include "spinbath/catalog.hpp"

namespace spinbath {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Smallest admissible relative-decoherence value; lambda = 0 would divide by
/// zero in the signal exponent.
inline constexpr double kLambdaMin = 1e-6;

/// How the per-tau envelope combines with the bath modulation product.
/// `verbatim` raises the product term to -tau/lambda, exactly as the model is
/// specified; `envelope` multiplies it by exp(-tau/lambda) instead, keeping
/// the signal inside [0, 1].
enum class SignalMode { verbatim, envelope };

/// Known experimental parameters: pulse count N, field B_z, the tau grid and
/// the nuclear gyromagnetic ratio (13C default, plain kHz/G; all internal
/// math is angular, rad/ms).
struct ExperimentSpec {
  int n_pulses = 16;
  double b_field_gauss = 311.0;
  Eigen::ArrayXd tau_grid_ms;
  double gamma_n_khz_per_gauss = 1.0705;

  void validate() const;
};

/// The variable-dimension parameter block: one (a_par, a_perp) pair per spin.
struct SpinBath {
  Eigen::ArrayX2d couplings_khz;  // col 0 = a_par, col 1 = a_perp (>= 0)

  Eigen::Index size() const { return couplings_khz.rows(); }

  static SpinBath empty() { return SpinBath{Eigen::ArrayX2d(0, 2)}; }
  static SpinBath from_sites(const LatticeCatalog& catalog, std::span<const int> site_ids);
};

/// omega_L = -gamma_n * B_z, in rad/ms.
double larmor_rad_per_ms(const ExperimentSpec& spec);

/// Single-spin modulation M(A_par, A_perp, N, B_z, tau) in [-1, 1].
double spin_modulation(double a_par_khz, double a_perp_khz, const ExperimentSpec& spec, double tau_ms);

/// Modulation evaluated over the whole tau grid of `spec`.
Eigen::ArrayXd spin_modulation_grid(double a_par_khz, double a_perp_khz, const ExperimentSpec& spec);

/// prod_i M_i over the grid; ones for an empty bath.
Eigen::ArrayXd bath_modulation_product(const SpinBath& bath, const ExperimentSpec& spec);

/// Map the modulation product to the coherence signal. No pole checks; in
/// verbatim mode a zero base yields +inf at that tau.
Eigen::ArrayXd coherence_from_product(const Eigen::ArrayXd& product, double lambda, const ExperimentSpec& spec,
                                      SignalMode mode);

/// Verbatim-mode pole guard: a modulation product of exactly -1 makes the
/// base zero and the signal undefined for finite exponents.
void throw_if_pole(const Eigen::ArrayXd& product, SignalMode mode);

/// Full forward model f_k over the tau grid. Throws DomainError on the
/// verbatim-mode pole (base exactly zero); callers scoring candidates treat
/// that as -inf log-likelihood instead.
Eigen::ArrayXd coherence_signal(const SpinBath& bath, double lambda, const ExperimentSpec& spec,
                                SignalMode mode = SignalMode::verbatim);

}  // namespace spinbath
