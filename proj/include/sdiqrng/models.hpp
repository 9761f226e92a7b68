#pragma once

#include <optional>

namespace sdiqrng::models {

/// Unbalanced device-dependent homodyne parameters. `f` is the relative
/// intensity noise ratio sqrt(Var(n))/n_bar of the bright beam, which for a
/// coherent beam includes the shot-noise floor 1/sqrt(n_bar).
struct UhdParams {
  double n_bar_r = 0.0;      // mean photons per window at the randomness arm
  double r0 = 0.5;
  double f = 0.0;
  double sigma_nd_sq = 0.0;  // electronic noise variance, photons^2
};

struct UhdVariance {
  double lo_term = 0.0;        // [(2 r0 - 1) n_bar f]^2
  double vacuum_term = 0.0;    // 4 r0 (1 - r0) n_bar
  double electronic_term = 0.0;
  double total = 0.0;
};

UhdVariance uhd_variance(const UhdParams& p);

struct DdEntropy {
  double bits = 0.0;
  bool capped = false;  // clamped at the ADC bit depth
};

/// Device-dependent min-entropy from the vacuum-fluctuation variance
/// sigma_Q^2 = 4 r0 (1-r0) n_bar_R, same erf form as the SDI bound.
/// When `cap_bits` is given the result saturates there (an ADC cannot emit
/// more than its word size).
DdEntropy min_entropy_dd(double n_bar_r, double r0, double delta_v,
                         double alpha_d,
                         std::optional<double> cap_bits = std::nullopt);

struct SaturationCheck {
  double c1 = 0.0;  // rail-peak probability
  double c2 = 0.0;  // center-peak probability
  bool c1_dominates = false;
};

/// Diagnostic for the rail-saturation branch of the DD bound. sigma_qv_sq is
/// the vacuum variance in volts^2.
SaturationCheck dd_saturation_check(double gamma_d_max_v, double v_max,
                                    double delta_v, double sigma_qv_sq);

/// Randomness gap of an ideal photon-counting ADC:
/// 1 + (1/2) log2(n_bar_R / n_R^-). Requires n_bar_R >= n_R^-.
double lambda_ideal(double n_bar_r, double n_r_minus);

/// DD-minus-SDI randomness gap with a finite-resolution ADC, evaluated as the
/// difference of the two erf-form entropies (the Gaussian-limit identity).
double lambda_enob(double n_bar_r, double n_r_minus, double r0, double delta_v,
                   double alpha_d);

/// The closed-form approximation of the same quantity,
/// 1 + (1/2) log2(n/n^-) + log2[sqrt(n^-) erf(.)/ (sqrt(4n) erf(.))].
double lambda_enob_closed_form(double n_bar_r, double n_r_minus, double r0,
                               double delta_v, double alpha_d);

struct AseParams {
  double b_opt_hz = 0.0;   // optical bandwidth
  double b_pd_hz = 0.0;    // photodetector bandwidth
  int s = 1;               // polarization degeneracy, 1 or 2
  double n_bar_total = 0.0;
};

/// Mode count of a Gaussian-spectrum ASE source:
/// M = s pi Bt^2 / (pi Bt erf(sqrt(pi) Bt) - [1 - exp(-pi Bt^2)]),
/// Bt = B_opt / B_pd. Small Bt evaluated by series (limit M -> s).
double ase_modes(const AseParams& p);

/// Photon-number variance of an M-mode ASE source: n + n^2 / M.
double ase_variance(double n_bar_total, double m_modes);

}  // namespace sdiqrng::models
