#include "sdiqrng/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace sdiqrng::stats {
namespace {

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

std::size_t popcount_all(const extractor::BitVec& bits) {
  std::size_t ones = 0;
  for (std::uint64_t w : bits.words()) ones += std::popcount(w);
  return ones;
}

double cusum_p_value(double z, double n) {
  if (z <= 0.0) return 0.0;
  const double sq = std::sqrt(n);
  double sum1 = 0.0;
  {
    const auto k_lo = static_cast<long>(std::floor((-n / z + 1.0) / 4.0));
    const auto k_hi = static_cast<long>(std::floor((n / z - 1.0) / 4.0));
    for (long k = k_lo; k <= k_hi; ++k) {
      sum1 += std_normal_cdf((4.0 * k + 1.0) * z / sq) -
              std_normal_cdf((4.0 * k - 1.0) * z / sq);
    }
  }
  double sum2 = 0.0;
  {
    const auto k_lo = static_cast<long>(std::floor((-n / z - 3.0) / 4.0));
    const auto k_hi = static_cast<long>(std::floor((n / z - 1.0) / 4.0));
    for (long k = k_lo; k <= k_hi; ++k) {
      sum2 += std_normal_cdf((4.0 * k + 3.0) * z / sq) -
              std_normal_cdf((4.0 * k + 1.0) * z / sq);
    }
  }
  double p = 1.0 - sum1 + sum2;
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double monobit_p(const extractor::BitVec& bits) {
  const auto n = static_cast<double>(bits.size());
  if (bits.size() < 100) throw std::invalid_argument("monobit: too few bits");
  const double ones = static_cast<double>(popcount_all(bits));
  const double s = std::abs(2.0 * ones - n) / std::sqrt(n);
  return std::erfc(s / std::sqrt(2.0));
}

double block_frequency_p(const extractor::BitVec& bits, int block_len) {
  const std::size_t n_blocks = bits.size() / static_cast<std::size_t>(block_len);
  if (n_blocks == 0) throw std::invalid_argument("block_frequency: too few bits");
  double chi_sq = 0.0;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    std::size_t ones = 0;
    const std::size_t base = b * static_cast<std::size_t>(block_len);
    for (int i = 0; i < block_len; ++i) ones += bits.get(base + i);
    const double pi = static_cast<double>(ones) / block_len;
    chi_sq += (pi - 0.5) * (pi - 0.5);
  }
  chi_sq *= 4.0 * block_len;
  if (chi_sq <= 0.0) return 1.0;  // boost's gamma_q dislikes x = 0 at large a
  return boost::math::gamma_q(static_cast<double>(n_blocks) / 2.0,
                              chi_sq / 2.0);
}

double runs_p(const extractor::BitVec& bits) {
  const std::size_t n = bits.size();
  if (n < 100) throw std::invalid_argument("runs: too few bits");
  const double pi = static_cast<double>(popcount_all(bits)) /
                    static_cast<double>(n);
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(static_cast<double>(n)))
    return 0.0;  // frequency pre-test failed
  std::size_t v = 1;
  bool prev = bits.get(0);
  for (std::size_t i = 1; i < n; ++i) {
    const bool cur = bits.get(i);
    v += cur != prev;
    prev = cur;
  }
  const double nn = static_cast<double>(n);
  const double num = std::abs(static_cast<double>(v) - 2.0 * nn * pi * (1.0 - pi));
  const double den = 2.0 * std::sqrt(2.0 * nn) * pi * (1.0 - pi);
  return std::erfc(num / den);
}

CusumP cusum_p(const extractor::BitVec& bits) {
  const std::size_t n = bits.size();
  if (n < 100) throw std::invalid_argument("cusum: too few bits");
  long long s = 0;
  long long max_fwd = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s += bits.get(i) ? 1 : -1;
    max_fwd = std::max(max_fwd, std::llabs(s));
  }
  // Reverse-mode statistic: max_k |S_n - S_{n-k}| = max over suffix sums.
  const long long total = s;
  long long max_rev = 0;
  s = 0;
  for (std::size_t i = n; i-- > 0;) {
    s += bits.get(i) ? 1 : -1;
    max_rev = std::max(max_rev, std::llabs(s));
  }
  (void)total;
  CusumP out;
  out.forward = cusum_p_value(static_cast<double>(max_fwd),
                              static_cast<double>(n));
  out.reverse = cusum_p_value(static_cast<double>(max_rev),
                              static_cast<double>(n));
  return out;
}

std::vector<TestResult> run_battery(const extractor::BitVec& bits) {
  std::vector<TestResult> out;
  auto add = [&](const std::string& name, double p) {
    out.push_back({name, p, p >= kPassThreshold});
  };
  add("monobit", monobit_p(bits));
  add("block-frequency", block_frequency_p(bits));
  add("runs", runs_p(bits));
  const CusumP cs = cusum_p(bits);
  add("cumulative-sums-forward", cs.forward);
  add("cumulative-sums-reverse", cs.reverse);
  return out;
}

double p_value_uniformity(const std::vector<double>& p_values) {
  if (p_values.empty()) return 0.0;
  int counts[10] = {0};
  for (double p : p_values) {
    int cell = std::min(9, static_cast<int>(p * 10.0));
    ++counts[std::max(0, cell)];
  }
  const double expect = static_cast<double>(p_values.size()) / 10.0;
  double chi_sq = 0.0;
  for (int c : counts) chi_sq += (c - expect) * (c - expect) / expect;
  if (chi_sq <= 0.0) return 1.0;
  return boost::math::gamma_q(4.5, chi_sq / 2.0);
}

}  // namespace sdiqrng::stats
