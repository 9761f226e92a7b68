#include "sdiqrng/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdiqrng::models {
namespace {

/// -log2 of the erf-form guessing probability at variance sigma_sq (photons^2).
double erf_form_bits(double sigma_sq, double delta_v, double alpha_d) {
  const double s = std::sqrt(2.0 * sigma_sq);
  const double a = delta_v / (2.0 * alpha_d);
  const double p = 0.5 * (std::erf(a / s) - std::erf((-a - 1.0) / s));
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log2(p);
}

}  // namespace

UhdVariance uhd_variance(const UhdParams& p) {
  if (!(p.n_bar_r >= 0.0) || !(p.f >= 0.0) || !(p.sigma_nd_sq >= 0.0))
    throw std::invalid_argument("uhd_variance: parameters must be >= 0");
  if (!(p.r0 >= 0.0 && p.r0 <= 1.0))
    throw std::invalid_argument("uhd_variance: r0 outside [0, 1]");
  UhdVariance v;
  const double lo = (2.0 * p.r0 - 1.0) * p.n_bar_r * p.f;
  v.lo_term = lo * lo;
  v.vacuum_term = 4.0 * p.r0 * (1.0 - p.r0) * p.n_bar_r;
  v.electronic_term = p.sigma_nd_sq;
  v.total = v.lo_term + v.vacuum_term + v.electronic_term;
  return v;
}

DdEntropy min_entropy_dd(double n_bar_r, double r0, double delta_v,
                         double alpha_d, std::optional<double> cap_bits) {
  if (r0 <= 0.0 || r0 >= 1.0)
    throw std::invalid_argument(
        "min_entropy_dd: r0 in {0, 1} leaves no vacuum fluctuation");
  if (!(n_bar_r > 0.0))
    throw std::invalid_argument("min_entropy_dd: n_bar_R must be > 0");
  const double sigma_q_sq = 4.0 * r0 * (1.0 - r0) * n_bar_r;
  DdEntropy e;
  e.bits = erf_form_bits(sigma_q_sq, delta_v, alpha_d);
  if (cap_bits && e.bits > *cap_bits) {
    e.bits = *cap_bits;
    e.capped = true;
  }
  return e;
}

SaturationCheck dd_saturation_check(double gamma_d_max_v, double v_max,
                                    double delta_v, double sigma_qv_sq) {
  SaturationCheck c;
  const double s = std::sqrt(2.0 * sigma_qv_sq);
  c.c1 = 0.5 * (std::erf((gamma_d_max_v - v_max + 1.5 * delta_v) / s) + 1.0);
  c.c2 = std::erf((delta_v / 2.0) / s);
  c.c1_dominates = c.c1 > c.c2;
  return c;
}

double lambda_ideal(double n_bar_r, double n_r_minus) {
  if (!(n_bar_r > 0.0) || !(n_r_minus > 0.0))
    throw std::invalid_argument("lambda_ideal: counts must be > 0");
  if (n_bar_r < n_r_minus)
    throw std::invalid_argument("lambda_ideal: requires n_bar_R >= n_R^-");
  return 1.0 + 0.5 * std::log2(n_bar_r / n_r_minus);
}

double lambda_enob(double n_bar_r, double n_r_minus, double r0, double delta_v,
                   double alpha_d) {
  if (n_bar_r < n_r_minus)
    throw std::invalid_argument("lambda_enob: requires n_bar_R >= n_R^-");
  const double dd = erf_form_bits(4.0 * r0 * (1.0 - r0) * n_bar_r, delta_v,
                                  alpha_d);
  const double sdi = erf_form_bits(r0 * (1.0 - r0) * n_r_minus, delta_v,
                                   alpha_d);
  return dd - sdi;
}

double lambda_enob_closed_form(double n_bar_r, double n_r_minus, double r0,
                               double delta_v, double alpha_d) {
  if (n_bar_r < n_r_minus)
    throw std::invalid_argument("lambda_enob: requires n_bar_R >= n_R^-");
  const double a = delta_v / (2.0 * alpha_d);
  const double sigma_a_sq = r0 * (1.0 - r0) * n_r_minus;
  const double sigma_q_sq = 4.0 * r0 * (1.0 - r0) * n_bar_r;
  const double erf_a = std::erf(a / std::sqrt(2.0 * sigma_a_sq));
  const double erf_q = std::erf(a / std::sqrt(2.0 * sigma_q_sq));
  return 1.0 + 0.5 * std::log2(n_bar_r / n_r_minus) +
         std::log2(std::sqrt(n_r_minus) * erf_a /
                   (std::sqrt(4.0 * n_bar_r) * erf_q));
}

double ase_modes(const AseParams& p) {
  if (!(p.b_opt_hz > 0.0) || !(p.b_pd_hz > 0.0))
    throw std::invalid_argument("ase_modes: bandwidths must be > 0");
  if (p.s != 1 && p.s != 2)
    throw std::invalid_argument("ase_modes: polarization degeneracy is 1 or 2");
  const double bt = p.b_opt_hz / p.b_pd_hz;
  const double u_sq = M_PI * bt * bt;
  const double s = static_cast<double>(p.s);
  if (bt < 1e-3) {
    // Series of the denominator; the 0/0 limit is M = s.
    return s / (1.0 - u_sq / 6.0 + u_sq * u_sq / 30.0 -
                u_sq * u_sq * u_sq / 168.0);
  }
  const double denom =
      M_PI * bt * std::erf(std::sqrt(M_PI) * bt) + std::expm1(-u_sq);
  return s * u_sq / denom;
}

double ase_variance(double n_bar_total, double m_modes) {
  if (!(m_modes >= 1.0))
    throw std::invalid_argument("ase_variance: mode count must be >= 1");
  if (!(n_bar_total >= 0.0))
    throw std::invalid_argument("ase_variance: mean must be >= 0");
  return n_bar_total + n_bar_total * n_bar_total / m_modes;
}

}  // namespace sdiqrng::models
