#pragma once

#include <cstdint>

#include "sdiqrng/rng.hpp"

namespace sdiqrng::optics {

inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kLightSpeed = 299792458.0;      // m / s

/// Means below this are sampled with exact integer distributions; above it a
/// Gaussian with continuity rounding is used.
inline constexpr double kExactSamplingThreshold = 1e5;

/// Photon-number statistics of the light entering the QRG, per acquisition
/// window. `rin_f` is the relative intensity noise ratio of the bright beam;
/// it is only exercised by the device-dependent comparison.
struct SourceModel {
  enum class Kind { Fock, Coherent, ThermalAse };

  Kind kind = Kind::Coherent;
  std::int64_t photons = 0;    // Fock
  double mean_photons = 0.0;   // Coherent / ThermalAse: total over all modes
  double modes = 1.0;          // ThermalAse: mode count M (real-valued)
  int polarization_s = 1;      // ThermalAse: 1 (polarized) or 2 (unpolarized)
  double rin_f = 0.0;

  static SourceModel fock(std::int64_t n);
  static SourceModel coherent(double n_bar, double rin_f = 0.0);
  static SourceModel thermal_ase(double n_bar_total, double modes, int s);

  /// Mean photon count per window regardless of kind.
  double mean() const;

  void validate() const;  // throws std::invalid_argument
};

struct BeamSplitter {
  double reflectivity = 0.5;  // in [0, 1]
  void validate() const;
};

/// Trusted photodetector + transimpedance amplifier chain.
struct DetectorModel {
  double bandwidth_hz = 0.0;
  double responsivity_a_per_w = 0.0;
  double gain_ohm = 0.0;
  double wavelength_m = 0.0;
  double sigma_gamma_v = 0.0;      // electronic noise std dev, volts
  std::int64_t sat_photons = 0;    // saturation photon count per window
  void validate() const;
};

struct AdcModel {
  int bits = 14;                // nominal resolution b
  double enob = 14.0;           // effective number of bits
  double v_min = -1.0;
  double v_max = 1.0;
  double sample_rate_hz = 0.0;

  /// Effective (ENOB) bin width (v_max - v_min) / 2^enob.
  double bin_width_v() const;
  /// Raw bin width (v_max - v_min) / 2^bits.
  double raw_bin_width_v() const;
  /// Extreme ENOB bin indices (bins containing v_min / v_max).
  std::int64_t min_bin() const;
  std::int64_t max_bin() const;

  void validate() const;
};

/// alpha = h c BW eta G / lambda, volts per photon.
double conversion_factor(const DetectorModel& det);

/// Mean photons per acquisition window for optical power `power_w`:
/// P lambda / (h c BW). Multiplying by conversion_factor gives eta G P.
double mean_photons_per_window(double power_w, const DetectorModel& det);

/// Inverse of mean_photons_per_window.
double power_for_mean_photons(double photons, const DetectorModel& det);

std::int64_t sample_source(const SourceModel& model, Rng& rng);

struct SplitResult {
  std::int64_t reflected = 0;
  std::int64_t transmitted = 0;
};

/// Binomial partition of n photons; reflected ~ Binomial(n, r).
SplitResult split(std::int64_t n, const BeamSplitter& bs, Rng& rng);

/// v = alpha * min(n, sat_photons) + gamma, gamma ~ N(0, sigma_gamma^2).
double detect(std::int64_t n, const DetectorModel& det, Rng& rng);

/// ENOB bin index j of voltage v; bin centers at j * bin_width, rails clamp.
std::int64_t quantize(double v, const AdcModel& adc);

/// Raw b-bit bin index in [-2^(b-1), 2^(b-1) - 1], rails clamp.
std::int64_t quantize_raw(double v, const AdcModel& adc);

// Sampling primitives with the exact/Gaussian crossover policy. Exposed for
// reuse by the pipeline and for distribution tests.
std::int64_t sample_poisson(double mean, Rng& rng);
std::int64_t sample_binomial(std::int64_t n, double p, Rng& rng);
std::int64_t sample_thermal(double n_bar_total, double modes, Rng& rng);

}  // namespace sdiqrng::optics
