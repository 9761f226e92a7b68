#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdiqrng/pipeline.hpp"

namespace sdiqrng::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnalyzeSweep {
  std::vector<double> powers_mw;
  std::vector<double> r0s;
};

struct AttackSweep {
  double r_e = 0.0105;
  double optimal_power_mw = 0.2;       // operating point the window is solved at
  double honest_pass_fraction = 0.005; // no-Eve pass target
  std::vector<double> eve_powers_uw;   // explicit grid; empty = auto
  int auto_points = 17;                // odd count puts the optimum on the grid
  std::int64_t rounds_per_point = 100000;
};

struct CompareSettings {
  std::optional<double> n_r_minus_ratio;  // n_bar_R / n_R^-, bypasses the solver
  std::int64_t histogram_rounds = 200000;
};

struct RunSettings {
  std::int64_t total_rounds = 1000000;
};

/// A full CLI configuration: the protocol plus per-subcommand settings.
struct FullConfig {
  pipeline::ProtocolConfig protocol;
  AnalyzeSweep analyze;
  AttackSweep attack;
  CompareSettings compare;
  RunSettings run;
  std::optional<std::filesystem::path> seed_file;  // Toeplitz seed bits
};

/// Parses and validates a JSON config; error messages carry field paths.
/// The extractor seed is read from `seed_file` when given, otherwise derived
/// pseudorandomly from `seed` (explicitly not a cryptographic seed source).
FullConfig load(const std::filesystem::path& path, std::uint64_t seed);
FullConfig load_from_string(const std::string& text, std::uint64_t seed);

/// The built-in configuration mirroring the reference run parameters.
std::string default_config_json();

}  // namespace sdiqrng::config
