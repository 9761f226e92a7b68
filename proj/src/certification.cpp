#include "sdiqrng/certification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace sdiqrng::certification {
namespace {

// The log-space machinery runs in long double: the lgamma magnitudes reach
// ~1e5 for the summation range, and 64-bit mantissas keep the resulting
// per-term error near 1e-14 relative.
constexpr long double kLogZero = -std::numeric_limits<long double>::infinity();

long double log_choose(std::int64_t n, std::int64_t k) {
  return lgammal(static_cast<long double>(n) + 1.0L) -
         lgammal(static_cast<long double>(k) + 1.0L) -
         lgammal(static_cast<long double>(n - k) + 1.0L);
}

/// log of Binomial(n, p) pmf at k; handles p in {0, 1}.
long double log_binom_pmf(std::int64_t n, std::int64_t k, double p) {
  if (k < 0 || k > n) return kLogZero;
  if (p <= 0.0) return k == 0 ? 0.0L : kLogZero;
  if (p >= 1.0) return k == n ? 0.0L : kLogZero;
  return log_choose(n, k) +
         static_cast<long double>(k) * logl(static_cast<long double>(p)) +
         static_cast<long double>(n - k) *
             log1pl(static_cast<long double>(-p));
}

/// Streaming log-sum-exp accumulator.
class LogSum {
 public:
  void add(long double log_term) {
    if (log_term == kLogZero) return;
    if (max_ == kLogZero) {
      max_ = log_term;
      sum_ = 1.0L;
      return;
    }
    if (log_term <= max_) {
      sum_ += expl(log_term - max_);
    } else {
      sum_ = sum_ * expl(max_ - log_term) + 1.0L;
      max_ = log_term;
    }
  }
  double value() const {
    return max_ == kLogZero
               ? 0.0
               : static_cast<double>(expl(max_) * sum_);
  }

 private:
  long double max_ = kLogZero;
  long double sum_ = 0.0L;
};

/// P[a <= Z <= b] for standard normal Z, stable in both tails.
double normal_interval_prob(double a, double b) {
  if (b <= a) return 0.0;
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  double p;
  if (a >= 0.0) {
    p = 0.5 * (std::erfc(a * inv_sqrt2) - std::erfc(b * inv_sqrt2));
  } else if (b <= 0.0) {
    p = 0.5 * (std::erfc(-b * inv_sqrt2) - std::erfc(-a * inv_sqrt2));
  } else {
    p = 0.5 * (std::erf(b * inv_sqrt2) - std::erf(a * inv_sqrt2));
  }
  return std::clamp(p, 0.0, 1.0);
}

double lower_normal_tail(double z) {
  return 0.5 * std::erfc(-z * 0.7071067811865475244);
}

void check_reflectivity(double r, const char* what) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument(what);
}

}  // namespace

PhotonBounds PhotonBounds::derive(std::int64_t n_c_minus,
                                  std::int64_t n_c_plus,
                                  std::int64_t n_r_minus,
                                  std::int64_t n_r_plus) {
  if (n_c_minus < 0 || n_c_minus > n_c_plus)
    throw std::invalid_argument("PhotonBounds: need 0 <= n_C^- <= n_C^+");
  if (n_r_minus < 0 || n_r_minus > n_r_plus)
    throw std::invalid_argument("PhotonBounds: need 0 <= n_R^- <= n_R^+");
  PhotonBounds b;
  b.n_c_minus = n_c_minus;
  b.n_c_plus = n_c_plus;
  b.n_r_minus = n_r_minus;
  b.n_r_plus = n_r_plus;
  b.n_e_minus = n_c_minus + n_r_minus - 1;
  b.n_e_plus = n_c_plus + n_r_plus + 1;
  return b;
}

std::int64_t peak_diff_outcome(std::int64_t n, double r0) {
  if (n < 0) throw std::invalid_argument("peak_diff_outcome: n must be >= 0");
  check_reflectivity(r0, "peak_diff_outcome: r0 outside [0, 1]");
  double raw = std::ceil(static_cast<double>(n + 1) * r0 - 1.0);
  auto mode = static_cast<std::int64_t>(raw);
  mode = std::clamp<std::int64_t>(mode, 0, n);
  return 2 * mode - n;
}

IntInterval sdi_window(std::int64_t mu_x, double delta_v, double alpha_d) {
  if (!(delta_v >= 0.0) || !(alpha_d > 0.0))
    throw std::invalid_argument("sdi_window: need delta_v >= 0, alpha_d > 0");
  const double half = delta_v / (2.0 * alpha_d);
  return IntInterval{mu_x - static_cast<std::int64_t>(std::ceil(half)),
                     mu_x + static_cast<std::int64_t>(std::floor(half))};
}

double guessing_prob_exact(std::int64_t n_r_minus, double r0,
                           const IntInterval& window) {
  if (n_r_minus < 0)
    throw std::invalid_argument("guessing_prob_exact: n_R^- must be >= 0");
  check_reflectivity(r0, "guessing_prob_exact: r0 outside [0, 1]");
  const std::int64_t n = n_r_minus;
  // Outcomes outside [-n, n] have no support; parity must match n.
  std::int64_t lo = std::max(window.lo, -n);
  std::int64_t hi = std::min(window.hi, n);
  if (((lo + n) & 1) != 0) ++lo;
  LogSum sum;
  for (std::int64_t x = lo; x <= hi; x += 2) {
    sum.add(log_binom_pmf(n, (n + x) / 2, r0));
  }
  return std::min(sum.value(), 1.0);
}

double guessing_prob_gaussian(std::int64_t n_r_minus, double r0,
                              double delta_v, double alpha_d) {
  check_reflectivity(r0, "guessing_prob_gaussian: r0 outside [0, 1]");
  const auto n = static_cast<double>(n_r_minus);
  if (!(n > 1e5) || !(r0 * n > 5.0) || !((1.0 - r0) * n > 5.0))
    throw std::domain_error(
        "guessing_prob_gaussian: Gaussian limit requires n_R^- > 1e5 and "
        "r0 n_R^- > 5 and (1-r0) n_R^- > 5");
  if (!(delta_v > 0.0) || !(alpha_d > 0.0))
    throw std::invalid_argument("guessing_prob_gaussian: bad voltage scale");
  const double sigma_sq = r0 * (1.0 - r0) * n;
  const double s = std::sqrt(2.0 * sigma_sq);
  const double a = delta_v / (2.0 * alpha_d);
  const double p = 0.5 * (std::erf(a / s) - std::erf((-a - 1.0) / s));
  return std::clamp(p, 0.0, 1.0);
}

EntropyReport min_entropy_sdi(std::int64_t m, std::int64_t n_r_minus,
                              double r0, double delta_v, double alpha_d,
                              PguessMode mode) {
  if (m < 1) throw std::invalid_argument("min_entropy_sdi: m must be >= 1");
  EntropyReport rep;
  rep.mu_x = peak_diff_outcome(n_r_minus, r0);
  rep.window = sdi_window(rep.mu_x, delta_v, alpha_d);
  rep.sigma_a_sq = r0 * (1.0 - r0) * static_cast<double>(n_r_minus);
  if (r0 <= 0.0 || r0 >= 1.0) {
    // Deterministic outcome: every photon reaches one detector.
    rep.p_guess = 1.0;
  } else if (mode == PguessMode::Exact) {
    rep.p_guess = guessing_prob_exact(n_r_minus, r0, rep.window);
  } else {
    rep.p_guess = guessing_prob_gaussian(n_r_minus, r0, delta_v, alpha_d);
  }
  rep.kappa_bits = rep.p_guess >= 1.0
                       ? 0.0
                       : -static_cast<double>(m) * std::log2(rep.p_guess);
  rep.h_min_per_sample = rep.kappa_bits / static_cast<double>(m);
  return rep;
}

double binomial_tail_logsum(std::int64_t k, std::int64_t n, double p) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  LogSum sum;
  for (std::int64_t i = k; i <= n; ++i) sum.add(log_binom_pmf(n, i, p));
  return std::min(sum.value(), 1.0);
}

double binomial_tail_ibeta(std::int64_t k, std::int64_t n, double p) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  // P[X >= k] = I_p(k, n - k + 1)
  return boost::math::ibeta(static_cast<double>(k),
                            static_cast<double>(n - k + 1), p);
}

double binomial_upper_tail(std::int64_t k, std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial_upper_tail: n must be >= 0");
  check_reflectivity(p, "binomial_upper_tail: p outside [0, 1]");
  return n <= kTailCrossover ? binomial_tail_logsum(k, n, p)
                             : binomial_tail_ibeta(k, n, p);
}

double epsilon_minus(std::int64_t n_c_minus, std::int64_t n_e_minus,
                     double r1) {
  if (n_c_minus < 0 || n_c_minus > n_e_minus)
    throw std::invalid_argument("epsilon_minus: need 0 <= n_C^- <= n_E^-");
  return binomial_upper_tail(n_c_minus, n_e_minus, r1);
}

double epsilon_plus(std::int64_t n_r_plus, std::int64_t n_e_plus, double r1) {
  if (n_r_plus < 0 || n_r_plus > n_e_plus)
    throw std::invalid_argument("epsilon_plus: need 0 <= n_R^+ <= n_E^+");
  return binomial_upper_tail(n_r_plus, n_e_plus, 1.0 - r1);
}

double epsilon_gamma(double gamma_tilde_v, double sigma_gamma_c_v) {
  if (!(gamma_tilde_v >= 0.0))
    throw std::invalid_argument("epsilon_gamma: gamma_tilde must be >= 0");
  if (!(sigma_gamma_c_v > 0.0))
    throw std::invalid_argument("epsilon_gamma: sigma must be > 0");
  return std::erfc(gamma_tilde_v / (std::sqrt(2.0) * sigma_gamma_c_v));
}

SecurityBudget epsilon_fail(double eps_minus, double eps_plus,
                            double eps_gamma_c, std::int64_t m, double eps_c,
                            double gamma_tilde_c_v, double sigma_gamma_c_v) {
  for (double e : {eps_minus, eps_plus, eps_gamma_c})
    if (!(e >= 0.0 && e <= 1.0))
      throw std::invalid_argument("epsilon_fail: components must be in [0, 1]");
  if (m < 1) throw std::invalid_argument("epsilon_fail: m must be >= 1");
  SecurityBudget b;
  b.eps_minus = eps_minus;
  b.eps_plus = eps_plus;
  b.eps_gamma_c = eps_gamma_c;
  b.eps_fail = std::max(eps_minus, eps_plus) + eps_gamma_c;
  b.eps_fail_m = static_cast<double>(m) * b.eps_fail;
  b.eps_c = eps_c;
  b.m = m;
  b.gamma_tilde_c_v = gamma_tilde_c_v;
  b.sigma_gamma_c_v = sigma_gamma_c_v;
  b.status = eps_plus > eps_minus ? BudgetStatus::EpsOrderViolated
                                  : BudgetStatus::Ok;
  return b;
}

SolveResult solve_nr_minus(std::int64_t n_c_minus, double r1,
                           double target_eps_minus) {
  if (n_c_minus < 1)
    throw std::invalid_argument("solve_nr_minus: n_C^- must be >= 1");
  check_reflectivity(r1, "solve_nr_minus: r1 outside [0, 1]");
  SolveResult res;
  if (target_eps_minus >= 1.0) {
    res.status = SolveResult::Status::Unbounded;
    res.n_r_minus = std::numeric_limits<std::int64_t>::max();
    res.achieved_eps = 1.0;
    return res;
  }
  if (!(target_eps_minus > 0.0)) {
    res.status = SolveResult::Status::NoSolution;
    return res;
  }
  auto eval = [&](std::int64_t nr) {
    return nr <= 0 ? 0.0 : epsilon_minus(n_c_minus, n_c_minus + nr - 1, r1);
  };
  constexpr std::int64_t kCap = std::int64_t{1} << 50;
  // eval is non-decreasing in n_R^-: gallop to bracket the crossing, bisect.
  std::int64_t lo = 0;
  std::int64_t hi = 1;
  while (hi < kCap && eval(hi) <= target_eps_minus) {
    lo = hi;
    hi *= 2;
  }
  if (hi >= kCap) {
    res.status = SolveResult::Status::Unbounded;
    res.n_r_minus = kCap;
    res.achieved_eps = eval(lo);
    return res;
  }
  while (hi - lo > 1) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (eval(mid) <= target_eps_minus)
      lo = mid;
    else
      hi = mid;
  }
  res.achieved_eps = eval(lo);
  if (res.achieved_eps > target_eps_minus) {
    res.status = SolveResult::Status::NoSolution;
    return res;
  }
  res.status = SolveResult::Status::Found;
  res.n_r_minus = lo;
  return res;
}

double completeness(const IntInterval& window_bins, double mu_vc,
                    double sigma_vc, double delta_vc) {
  if (window_bins.lo > window_bins.hi)
    throw std::invalid_argument("completeness: inverted window");
  if (!(sigma_vc > 0.0))
    throw std::invalid_argument("completeness: sigma must be > 0");
  const double lo_edge =
      delta_vc * (static_cast<double>(window_bins.lo) - 0.5);
  const double hi_edge =
      delta_vc * (static_cast<double>(window_bins.hi) + 0.5);
  return normal_interval_prob((lo_edge - mu_vc) / sigma_vc,
                              (hi_edge - mu_vc) / sigma_vc);
}

std::optional<IntInterval> solve_cert_window(
    double target_eps_c, double mu_vc, double sigma_vc, double delta_vc,
    std::optional<IntInterval> rails) {
  if (!(target_eps_c > 0.0 && target_eps_c < 1.0))
    throw std::invalid_argument("solve_cert_window: target outside (0, 1)");
  if (!(sigma_vc > 0.0) || !(delta_vc > 0.0))
    throw std::invalid_argument("solve_cert_window: bad scale parameters");

  const double half_target = target_eps_c / 2.0;
  const auto center =
      static_cast<std::int64_t>(std::floor(mu_vc / delta_vc + 0.5));
  auto low_tail = [&](std::int64_t i) {
    // mass below the lower edge of bin i
    return lower_normal_tail(
        (delta_vc * (static_cast<double>(i) - 0.5) - mu_vc) / sigma_vc);
  };
  auto high_tail = [&](std::int64_t i) {
    // mass above the upper edge of bin i
    return lower_normal_tail(
        -(delta_vc * (static_cast<double>(i) + 0.5) - mu_vc) / sigma_vc);
  };

  // Largest i with low_tail(i) <= half_target (low_tail increases with i).
  std::int64_t step = 1;
  std::int64_t lo = center;
  while (low_tail(lo) > half_target) {
    lo -= step;
    step *= 2;
  }
  std::int64_t bad = lo + (step > 1 ? step / 2 : 1);
  while (bad - lo > 1) {
    std::int64_t mid = lo + (bad - lo) / 2;
    if (low_tail(mid) <= half_target)
      lo = mid;
    else
      bad = mid;
  }
  // Smallest i with high_tail(i) <= half_target (high_tail decreases with i).
  step = 1;
  std::int64_t hi = center;
  while (high_tail(hi) > half_target) {
    hi += step;
    step *= 2;
  }
  bad = hi - (step > 1 ? step / 2 : 1);
  while (hi - bad > 1) {
    std::int64_t mid = bad + (hi - bad) / 2;
    if (high_tail(mid) <= half_target)
      hi = mid;
    else
      bad = mid;
  }

  IntInterval window{std::min(lo, hi), std::max(lo, hi)};
  if (rails) {
    window.lo = std::max(window.lo, rails->lo);
    window.hi = std::min(window.hi, rails->hi);
    if (window.lo > window.hi) return std::nullopt;
    // A clamped side loses tail budget; try compensating with the other side.
    while (completeness(window, mu_vc, sigma_vc, delta_vc) <
           1.0 - target_eps_c) {
      bool grew = false;
      if (window.lo > rails->lo) {
        --window.lo;
        grew = true;
      }
      if (window.hi < rails->hi) {
        ++window.hi;
        grew = true;
      }
      if (!grew) return std::nullopt;
    }
  }
  // Both tails <= target/2, so the window meets the completeness target.
  return window;
}

}  // namespace sdiqrng::certification
