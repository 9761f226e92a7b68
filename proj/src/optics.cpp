#include "sdiqrng/optics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdiqrng::optics {

SourceModel SourceModel::fock(std::int64_t n) {
  SourceModel m;
  m.kind = Kind::Fock;
  m.photons = n;
  m.validate();
  return m;
}

SourceModel SourceModel::coherent(double n_bar, double rin_f) {
  SourceModel m;
  m.kind = Kind::Coherent;
  m.mean_photons = n_bar;
  m.rin_f = rin_f;
  m.validate();
  return m;
}

SourceModel SourceModel::thermal_ase(double n_bar_total, double modes, int s) {
  SourceModel m;
  m.kind = Kind::ThermalAse;
  m.mean_photons = n_bar_total;
  m.modes = modes;
  m.polarization_s = s;
  m.validate();
  return m;
}

double SourceModel::mean() const {
  return kind == Kind::Fock ? static_cast<double>(photons) : mean_photons;
}

void SourceModel::validate() const {
  if (kind == Kind::Fock && photons < 0)
    throw std::invalid_argument("SourceModel: Fock photon count must be >= 0");
  if (kind != Kind::Fock && !(mean_photons >= 0.0))
    throw std::invalid_argument("SourceModel: mean photons must be >= 0");
  if (kind == Kind::ThermalAse && !(modes >= 1.0))
    throw std::invalid_argument("SourceModel: mode count must be >= 1");
  if (kind == Kind::ThermalAse &&
      polarization_s != 1 && polarization_s != 2)
    throw std::invalid_argument("SourceModel: polarization degeneracy must be 1 or 2");
  if (!(rin_f >= 0.0))
    throw std::invalid_argument("SourceModel: rin_f must be >= 0");
}

void BeamSplitter::validate() const {
  if (!(reflectivity >= 0.0 && reflectivity <= 1.0))
    throw std::invalid_argument("BeamSplitter: reflectivity outside [0, 1]");
}

void DetectorModel::validate() const {
  if (!(bandwidth_hz > 0.0) || !(responsivity_a_per_w > 0.0) ||
      !(gain_ohm > 0.0) || !(wavelength_m > 0.0))
    throw std::invalid_argument("DetectorModel: parameters must be > 0");
  if (!(sigma_gamma_v >= 0.0))
    throw std::invalid_argument("DetectorModel: sigma_gamma must be >= 0");
  if (sat_photons <= 0)
    throw std::invalid_argument("DetectorModel: sat_photons must be > 0");
}

double AdcModel::bin_width_v() const {
  return (v_max - v_min) / std::exp2(enob);
}

double AdcModel::raw_bin_width_v() const {
  return (v_max - v_min) / std::exp2(static_cast<double>(bits));
}

std::int64_t AdcModel::min_bin() const {
  return static_cast<std::int64_t>(std::floor(v_min / bin_width_v() + 0.5));
}

std::int64_t AdcModel::max_bin() const {
  return static_cast<std::int64_t>(std::floor(v_max / bin_width_v() + 0.5));
}

void AdcModel::validate() const {
  if (!(v_max > v_min))
    throw std::invalid_argument("AdcModel: v_max must exceed v_min");
  if (!(enob > 0.0) || enob > static_cast<double>(bits))
    throw std::invalid_argument("AdcModel: require 0 < enob <= bits");
  if (bits <= 0 || bits > 30)
    throw std::invalid_argument("AdcModel: bits out of range");
}

double conversion_factor(const DetectorModel& det) {
  return kPlanck * kLightSpeed * det.bandwidth_hz * det.responsivity_a_per_w *
         det.gain_ohm / det.wavelength_m;
}

double mean_photons_per_window(double power_w, const DetectorModel& det) {
  if (power_w < 0.0)
    throw std::invalid_argument("mean_photons_per_window: power must be >= 0");
  return power_w * det.wavelength_m /
         (kPlanck * kLightSpeed * det.bandwidth_hz);
}

double power_for_mean_photons(double photons, const DetectorModel& det) {
  return photons * kPlanck * kLightSpeed * det.bandwidth_hz / det.wavelength_m;
}

std::int64_t sample_poisson(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  if (mean < kExactSamplingThreshold) return rng.poisson(mean);
  double x = rng.normal(mean, std::sqrt(mean));
  return x <= 0.0 ? 0 : static_cast<std::int64_t>(std::llround(x));
}

std::int64_t sample_binomial(std::int64_t n, double p, Rng& rng) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const double mean_small_side = static_cast<double>(n) * std::min(p, 1.0 - p);
  if (mean_small_side < kExactSamplingThreshold) {
    if (p <= 0.5) return rng.binomial(n, p);
    return n - rng.binomial(n, 1.0 - p);
  }
  const double mean = static_cast<double>(n) * p;
  const double var = mean * (1.0 - p);
  double x = rng.normal(mean, std::sqrt(var));
  auto k = static_cast<std::int64_t>(std::llround(x));
  return std::clamp<std::int64_t>(k, 0, n);
}

std::int64_t sample_thermal(double n_bar_total, double modes, Rng& rng) {
  if (n_bar_total <= 0.0) return 0;
  if (n_bar_total < kExactSamplingThreshold) {
    // M-fold degenerate Bose-Einstein as a gamma-mixed Poisson.
    const double lambda = rng.gamma(modes, n_bar_total / modes);
    return sample_poisson(lambda, rng);
  }
  const double var = n_bar_total + n_bar_total * n_bar_total / modes;
  double x = rng.normal(n_bar_total, std::sqrt(var));
  return x <= 0.0 ? 0 : static_cast<std::int64_t>(std::llround(x));
}

std::int64_t sample_source(const SourceModel& model, Rng& rng) {
  switch (model.kind) {
    case SourceModel::Kind::Fock:
      return model.photons;
    case SourceModel::Kind::Coherent: {
      double mean = model.mean_photons;
      if (model.rin_f > 0.0) {
        mean *= 1.0 + model.rin_f * rng.normal(0.0, 1.0);
        mean = std::max(mean, 0.0);
      }
      return sample_poisson(mean, rng);
    }
    case SourceModel::Kind::ThermalAse:
      return sample_thermal(model.mean_photons, model.modes, rng);
  }
  return 0;
}

SplitResult split(std::int64_t n, const BeamSplitter& bs, Rng& rng) {
  if (n < 0) throw std::invalid_argument("split: photon count must be >= 0");
  SplitResult out;
  out.reflected = sample_binomial(n, bs.reflectivity, rng);
  out.transmitted = n - out.reflected;
  return out;
}

double detect(std::int64_t n, const DetectorModel& det, Rng& rng) {
  if (n < 0) throw std::invalid_argument("detect: photon count must be >= 0");
  const std::int64_t clipped = std::min(n, det.sat_photons);
  double v = conversion_factor(det) * static_cast<double>(clipped);
  if (det.sigma_gamma_v > 0.0) v += rng.normal(0.0, det.sigma_gamma_v);
  return v;
}

std::int64_t quantize(double v, const AdcModel& adc) {
  const double dv = adc.bin_width_v();
  auto j = static_cast<std::int64_t>(std::floor(v / dv + 0.5));
  return std::clamp(j, adc.min_bin(), adc.max_bin());
}

std::int64_t quantize_raw(double v, const AdcModel& adc) {
  const double dv = adc.raw_bin_width_v();
  const std::int64_t half = std::int64_t{1} << (adc.bits - 1);
  auto j = static_cast<std::int64_t>(std::floor(v / dv + 0.5));
  return std::clamp(j, -half, half - 1);
}

}  // namespace sdiqrng::optics
