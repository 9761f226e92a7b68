#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sdiqrng/certification.hpp"
#include "sdiqrng/extractor.hpp"
#include "sdiqrng/optics.hpp"
#include "sdiqrng/rng.hpp"

namespace sdiqrng::pipeline {

/// Security targets and conventions used to derive the per-run budget.
/// By default the per-round failure budget is split evenly between the
/// lower-bound term and the electronic-noise term (eps_- = eps_gammaC =
/// eps_fail / 2), with eps_+ checked against eps_-.
struct SecurityPolicy {
  double eps_fail_target = 1e-20;
  double minus_fraction = 0.5;
  double eps_c_target = 1e-6;
  std::int64_t m = 183;
  double kappa_bits_per_sample = 0.0;  // certified operating value for rates
  std::optional<std::int64_t> n_r_plus_override;
};

struct ProtocolConfig {
  optics::SourceModel source;
  optics::BeamSplitter bs_cert;  // r1
  optics::BeamSplitter bs_gen;   // r0
  optics::DetectorModel pd_cert;
  optics::DetectorModel pd_a;
  optics::DetectorModel pd_b;
  optics::AdcModel adc;       // difference channel
  optics::AdcModel adc_cert;  // certification channel (often a wider range)
  SecurityPolicy policy;
  extractor::ExtractorConfig ext;
  certification::IntInterval cert_window;
  /// The balanced difference output is AC coupled: this static photon-number
  /// offset, (2 r0 - 1)(1 - r1) n_bar for the honest source, is removed
  /// before quantization.
  double diff_dc_offset_photons = 0.0;
  double hash_rate_hz = 125e6;
  int workers = 1;
  bool keep_raw_samples = true;

  double alpha_c() const { return optics::conversion_factor(pd_cert); }
  double alpha_d() const { return optics::conversion_factor(pd_a); }
  /// Detector whose bandwidth defines the acquisition window for converting
  /// optical power to photons per window.
  const optics::DetectorModel& window_reference() const { return pd_a; }
  /// Saturation bound of the difference measurement (both generation PDs).
  std::int64_t n_r_plus() const;

  void validate() const;
};

struct RoundResult {
  bool passed = false;
  std::int64_t cert_bin = 0;
  std::optional<std::int64_t> diff_bin;
  std::optional<std::uint32_t> raw_word;  // offset-binary b-bit ADC code
  std::int64_t n_source = 0;
  std::int64_t n_cert = 0;
  std::int64_t n_rand = 0;  // transmitted at r1
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
};

RoundResult simulate_round(const ProtocolConfig& cfg, Rng& rng);

/// Same round logic with the source photon count already drawn.
RoundResult simulate_round_with_source(const ProtocolConfig& cfg,
                                       std::int64_t n_source, Rng& rng);

struct RunReport {
  std::int64_t rounds_attempted = 0;
  std::int64_t rounds_passed = 0;
  double pass_fraction = 0.0;
  std::vector<std::uint16_t> raw_samples;  // words consumed into hash blocks
  extractor::BitVec extracted_bits;
  std::int64_t blocks_hashed = 0;
  extractor::SecuritySummary security;
  extractor::Rates rates;
  bool shortfall = false;
};

/// Runs up to `total_rounds` rounds, accumulating passed samples into hash
/// blocks of m samples in pass order and stopping once t blocks are hashed.
/// Output bits are a pure function of (cfg, rng identity) and do not depend
/// on cfg.workers: every round uses the stream rng.child(round_index).
RunReport run_protocol(const ProtocolConfig& cfg, std::int64_t total_rounds,
                       const Rng& rng);

struct EveScenario {
  optics::SourceModel honest;
  std::vector<double> eve_powers_w;
  optics::BeamSplitter bs_eve;  // r_E
};

struct SweepPoint {
  double eve_power_w = 0.0;
  double pass_fraction = 0.0;
  double std_err = 0.0;
  double analytic = 0.0;
};

/// Intensity-injection sweep: honest light thinned through 1 - r_E plus
/// Eve's coherent light thinned through r_E, certification test per round.
std::vector<SweepPoint> eve_sweep(const EveScenario& scenario,
                                  const ProtocolConfig& cfg,
                                  std::int64_t rounds_per_point,
                                  const Rng& rng);

enum class PointStatus { Ok, BelowNoiseFloor, Saturated, EpsOrderViolated };

const char* to_string(PointStatus s);

struct SurfacePoint {
  double power_w = 0.0;
  double r0 = 0.5;
  double kappa_per_sample = 0.0;
  PointStatus status = PointStatus::Ok;
  std::int64_t n_c_minus = 0;
  std::int64_t n_c_plus = 0;
  std::int64_t n_r_minus = 0;
  std::int64_t n_r_plus = 0;
  double eps_minus = 0.0;
  double eps_plus = 0.0;
};

/// Certified min-entropy per sample over a (power, r0) grid. Per power, the
/// certification window is solved for the configured eps_C target, photon
/// bounds follow from the window edges with a conservative electronic-noise
/// subtraction of gamma_tilde_C / alpha_C, and n_R^- from the eps_- budget.
std::vector<SurfacePoint> analyze_hmin_surface(const ProtocolConfig& cfg,
                                               std::span<const double> powers_w,
                                               std::span<const double> r0s);

/// Analytic certification pass probability for a given total source mean.
double analytic_pass_fraction(const ProtocolConfig& cfg,
                              double source_mean_photons);

/// Source mean at which the analytic pass probability equals `target`,
/// searched on the rising (low-power) side of the completeness curve.
double solve_source_mean_for_pass(const ProtocolConfig& cfg, double target);

/// Coefficient of determination of empirical pass fractions against the
/// analytic curve.
double r_squared(std::span<const SweepPoint> points);

/// Noise bound gamma_tilde for the configured electronic-noise budget share.
double gamma_tilde_for_policy(const ProtocolConfig& cfg);

}  // namespace sdiqrng::pipeline
