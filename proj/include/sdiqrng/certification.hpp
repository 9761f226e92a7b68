#pragma once

#include <cstdint>
#include <optional>

namespace sdiqrng::certification {

/// Closed integer interval [lo, hi].
struct IntInterval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::int64_t width() const { return hi - lo + 1; }
  bool contains(std::int64_t x) const { return x >= lo && x <= hi; }
  bool operator==(const IntInterval&) const = default;
};

/// Certified photon-number bounds. Totals satisfy n_e_pm = n_c_pm + n_r_pm +- 1.
struct PhotonBounds {
  std::int64_t n_c_minus = 0;
  std::int64_t n_c_plus = 0;
  std::int64_t n_r_minus = 0;
  std::int64_t n_r_plus = 0;
  std::int64_t n_e_minus = 0;
  std::int64_t n_e_plus = 0;

  static PhotonBounds derive(std::int64_t n_c_minus, std::int64_t n_c_plus,
                             std::int64_t n_r_minus, std::int64_t n_r_plus);
};

enum class BudgetStatus { Ok, EpsOrderViolated };

struct SecurityBudget {
  double eps_minus = 0.0;
  double eps_plus = 0.0;
  double eps_gamma_c = 0.0;
  double eps_fail = 0.0;
  double eps_fail_m = 0.0;
  double eps_c = 0.0;
  std::int64_t m = 1;
  double gamma_tilde_c_v = 0.0;
  double sigma_gamma_c_v = 0.0;
  BudgetStatus status = BudgetStatus::Ok;
};

struct EntropyReport {
  double p_guess = 1.0;
  double kappa_bits = 0.0;          // m-round certified min-entropy
  double h_min_per_sample = 0.0;    // kappa / m
  std::int64_t mu_x = 0;
  IntInterval window;
  double sigma_a_sq = 0.0;          // r0 (1-r0) n_R^-
};

enum class PguessMode { Exact, Gaussian };

/// Peak outcome of the difference measurement for a Fock input of n photons:
/// mu_x = 2 * ceil((n+1) r0 - 1) - n, with the mode clamped to [0, n].
std::int64_t peak_diff_outcome(std::int64_t n, double r0);

/// Integer window [mu_x - ceil(dv/2a), mu_x + floor(dv/2a)] covered by one
/// effective ADC bin around the peak outcome.
IntInterval sdi_window(std::int64_t mu_x, double delta_v, double alpha_d);

/// Adversary guessing probability: binomial mass of the difference outcome
/// over `window`. Outcomes with parity different from n have zero probability.
double guessing_prob_exact(std::int64_t n_r_minus, double r0,
                           const IntInterval& window);

/// Gaussian-limit guessing probability
///   1/2 [erf((dv/2a)/sqrt(2 s2)) - erf((-dv/2a - 1)/sqrt(2 s2))],
/// s2 = r0 (1-r0) n_R^-. Requires n_R^- > 1e5, r0 n_R^- > 5, (1-r0) n_R^- > 5.
double guessing_prob_gaussian(std::int64_t n_r_minus, double r0,
                              double delta_v, double alpha_d);

EntropyReport min_entropy_sdi(std::int64_t m, std::int64_t n_r_minus,
                              double r0, double delta_v, double alpha_d,
                              PguessMode mode);

/// P[X >= k] for X ~ Binomial(n, p). Direct log-space summation below the
/// crossover, regularized incomplete beta above it; both routes exposed for
/// cross-checks.
double binomial_upper_tail(std::int64_t k, std::int64_t n, double p);
double binomial_tail_logsum(std::int64_t k, std::int64_t n, double p);
double binomial_tail_ibeta(std::int64_t k, std::int64_t n, double p);
inline constexpr std::int64_t kTailCrossover = 10000;

/// eps_-: probability that fewer than n_C^- of n_E^- photons reflect at r1.
double epsilon_minus(std::int64_t n_c_minus, std::int64_t n_e_minus,
                     double r1);

/// eps_+: probability that at least n_R^+ of n_E^+ photons transmit at r1.
double epsilon_plus(std::int64_t n_r_plus, std::int64_t n_e_plus, double r1);

/// eps_gammaC = 1 - erf(gamma_tilde / (sqrt(2) sigma)).
double epsilon_gamma(double gamma_tilde_v, double sigma_gamma_c_v);

/// Combines the per-round failure components:
///   eps_fail = max(eps_-, eps_+) + eps_gammaC,  eps_fail_m = m * eps_fail.
/// The eps_+ > eps_- regime is flagged, not silently accepted.
SecurityBudget epsilon_fail(double eps_minus, double eps_plus,
                            double eps_gamma_c, std::int64_t m,
                            double eps_c = 0.0, double gamma_tilde_c_v = 0.0,
                            double sigma_gamma_c_v = 0.0);

struct SolveResult {
  enum class Status { Found, Unbounded, NoSolution };
  Status status = Status::NoSolution;
  std::int64_t n_r_minus = 0;
  double achieved_eps = 0.0;
};

/// Largest n_R^- with epsilon_minus(n_C^-, n_C^- + n_R^- - 1, r1) <= target.
SolveResult solve_nr_minus(std::int64_t n_c_minus, double r1,
                           double target_eps_minus);

/// Pass probability of the certification test: Gaussian voltage mass over the
/// bin window, telescoped across the window ends.
double completeness(const IntInterval& window_bins, double mu_vc,
                    double sigma_vc, double delta_vc);

/// Smallest bin window with at most target/2 mass outside on each side
/// (so completeness >= 1 - target). Rails, when given, bound the window; if
/// even the full rail range cannot reach the target, returns nullopt.
std::optional<IntInterval> solve_cert_window(
    double target_eps_c, double mu_vc, double sigma_vc, double delta_vc,
    std::optional<IntInterval> rails = std::nullopt);

}  // namespace sdiqrng::certification
