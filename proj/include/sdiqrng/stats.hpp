#pragma once

#include <string>
#include <vector>

#include "sdiqrng/extractor.hpp"

namespace sdiqrng::stats {

/// Per-sequence pass threshold, the usual per-test convention.
inline constexpr double kPassThreshold = 0.01;

struct TestResult {
  std::string name;
  double p_value = 0.0;
  bool pass = false;
};

double monobit_p(const extractor::BitVec& bits);
double block_frequency_p(const extractor::BitVec& bits, int block_len = 128);
double runs_p(const extractor::BitVec& bits);

struct CusumP {
  double forward = 0.0;
  double reverse = 0.0;
};
CusumP cusum_p(const extractor::BitVec& bits);

/// Monobit, block frequency, runs, and both cumulative-sums variants.
std::vector<TestResult> run_battery(const extractor::BitVec& bits);

/// Chi-square uniformity p-value of a set of per-sequence p-values binned
/// into ten cells (the aggregate column reported next to pass proportions).
double p_value_uniformity(const std::vector<double>& p_values);

}  // namespace sdiqrng::stats
