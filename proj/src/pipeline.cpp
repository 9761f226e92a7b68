#include "sdiqrng/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <boost/math/special_functions/erf.hpp>

namespace sdiqrng::pipeline {

namespace cert = sdiqrng::certification;

std::int64_t ProtocolConfig::n_r_plus() const {
  if (policy.n_r_plus_override) return *policy.n_r_plus_override;
  return pd_a.sat_photons + pd_b.sat_photons;
}

void ProtocolConfig::validate() const {
  source.validate();
  bs_cert.validate();
  bs_gen.validate();
  pd_cert.validate();
  pd_a.validate();
  pd_b.validate();
  adc.validate();
  ext.validate();
  if (cert_window.lo > cert_window.hi)
    throw std::invalid_argument("ProtocolConfig: inverted cert window");
  adc_cert.validate();
  if (cert_window.lo < adc_cert.min_bin() || cert_window.hi > adc_cert.max_bin())
    throw std::invalid_argument("ProtocolConfig: cert window outside ADC bins");
  if (workers < 1)
    throw std::invalid_argument("ProtocolConfig: workers must be >= 1");
  if (ext.b > 16)
    throw std::invalid_argument("ProtocolConfig: raw samples wider than 16 bits");
  if (ext.b != adc.bits)
    throw std::invalid_argument(
        "ProtocolConfig: extractor sample width must equal the ADC bits");
  if (!(hash_rate_hz > 0.0))
    throw std::invalid_argument("ProtocolConfig: hash rate must be > 0");
}

RoundResult simulate_round_with_source(const ProtocolConfig& cfg,
                                       std::int64_t n_source, Rng& rng) {
  RoundResult r;
  r.n_source = n_source;
  const auto at_cert = optics::split(n_source, cfg.bs_cert, rng);
  r.n_cert = at_cert.reflected;
  r.n_rand = at_cert.transmitted;
  const double v_cert = optics::detect(r.n_cert, cfg.pd_cert, rng);
  r.cert_bin = optics::quantize(v_cert, cfg.adc_cert);
  r.passed = cfg.cert_window.contains(r.cert_bin);
  if (!r.passed) return r;
  const auto at_gen = optics::split(r.n_rand, cfg.bs_gen, rng);
  r.n_a = at_gen.reflected;
  r.n_b = at_gen.transmitted;
  const double v_diff = optics::detect(r.n_a, cfg.pd_a, rng) -
                        optics::detect(r.n_b, cfg.pd_b, rng) -
                        cfg.alpha_d() * cfg.diff_dc_offset_photons;
  r.diff_bin = optics::quantize(v_diff, cfg.adc);
  const std::int64_t code = optics::quantize_raw(v_diff, cfg.adc);
  const std::int64_t offset = std::int64_t{1} << (cfg.adc.bits - 1);
  r.raw_word = static_cast<std::uint32_t>(code + offset);
  return r;
}

RoundResult simulate_round(const ProtocolConfig& cfg, Rng& rng) {
  return simulate_round_with_source(cfg, optics::sample_source(cfg.source, rng),
                                    rng);
}

namespace {

/// Batched, worker-invariant simulation: round i always uses rng.child(i).
/// Encoded result per round: -1 = failed, otherwise the raw b-bit word.
void simulate_batch(const ProtocolConfig& cfg, const Rng& rng,
                    std::int64_t first_round, std::int64_t count,
                    std::int32_t* out) {
  const int workers = std::max(1, cfg.workers);
  auto work = [&](int w) {
    const std::int64_t chunk = (count + workers - 1) / workers;
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min<std::int64_t>(count, lo + chunk);
    for (std::int64_t i = lo; i < hi; ++i) {
      Rng round_rng = rng.child(static_cast<std::uint64_t>(first_round + i));
      const RoundResult r = simulate_round(cfg, round_rng);
      out[i] = r.passed ? static_cast<std::int32_t>(*r.raw_word) : -1;
    }
  };
  if (workers == 1) {
    work(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  for (auto& th : pool) th.join();
}

}  // namespace

RunReport run_protocol(const ProtocolConfig& cfg, std::int64_t total_rounds,
                       const Rng& rng) {
  cfg.validate();
  if (total_rounds < cfg.ext.m)
    throw std::invalid_argument("run_protocol: need at least m rounds");
  const extractor::ToeplitzHasher hasher(cfg.ext);
  const std::int64_t target_blocks = cfg.ext.t;
  const std::int64_t m = cfg.ext.m;

  RunReport rep;
  if (cfg.keep_raw_samples)
    rep.raw_samples.reserve(
        static_cast<std::size_t>(std::min(total_rounds, target_blocks * m)));

  std::vector<std::uint64_t> block_words(
      static_cast<std::size_t>((cfg.ext.h + 63) / 64), 0);
  std::vector<std::uint64_t> acc(hasher.acc_words(), 0);
  std::int64_t in_block = 0;

  const std::int64_t batch = std::max<std::int64_t>(
      4096, std::int64_t{16384} * std::max(1, cfg.workers));
  std::vector<std::int32_t> results(static_cast<std::size_t>(batch));

  std::int64_t next_round = 0;
  bool done = target_blocks == 0;
  while (!done && next_round < total_rounds) {
    const std::int64_t n = std::min(batch, total_rounds - next_round);
    simulate_batch(cfg, rng, next_round, n, results.data());
    for (std::int64_t i = 0; i < n; ++i) {
      ++rep.rounds_attempted;
      const std::int32_t word = results[static_cast<std::size_t>(i)];
      if (word < 0) continue;
      ++rep.rounds_passed;
      if (cfg.keep_raw_samples)
        rep.raw_samples.push_back(static_cast<std::uint16_t>(word));
      // Pack the b-bit word MSB-first into the block at sample slot in_block.
      const std::int64_t base = in_block * cfg.ext.b;
      for (int k = 0; k < cfg.ext.b; ++k) {
        const std::int64_t bitpos = base + k;
        if ((word >> (cfg.ext.b - 1 - k)) & 1) {
          block_words[static_cast<std::size_t>(bitpos >> 6)] |=
              std::uint64_t{1} << (bitpos & 63);
        }
      }
      if (++in_block == m) {
        hasher.hash_block(block_words.data(), acc.data());
        rep.extracted_bits.append_bits(acc,
                                       static_cast<std::size_t>(cfg.ext.l));
        ++rep.blocks_hashed;
        std::fill(block_words.begin(), block_words.end(), 0);
        in_block = 0;
        if (rep.blocks_hashed == target_blocks) {
          done = true;
          break;
        }
      }
    }
    next_round += n;
  }

  rep.pass_fraction = rep.rounds_attempted == 0
                          ? 0.0
                          : static_cast<double>(rep.rounds_passed) /
                                static_cast<double>(rep.rounds_attempted);
  rep.shortfall = rep.blocks_hashed < target_blocks;
  rep.security = extractor::composable_epsilon(
      cfg.ext.t, cfg.ext.eps_hash, cfg.ext.m, cfg.policy.eps_fail_target,
      cfg.ext.l, cfg.ext.h);
  rep.rates = extractor::rates(cfg.adc.sample_rate_hz, cfg.hash_rate_hz,
                               cfg.policy.kappa_bits_per_sample,
                               static_cast<int>(cfg.ext.b),
                               rep.security.compression_r,
                               cfg.policy.eps_c_target);
  return rep;
}

double analytic_pass_fraction(const ProtocolConfig& cfg,
                              double source_mean_photons) {
  const double n_c = cfg.bs_cert.reflectivity * source_mean_photons;
  const double alpha_c = cfg.alpha_c();
  const double mu = alpha_c * n_c;
  const double sigma = std::sqrt(cfg.pd_cert.sigma_gamma_v *
                                     cfg.pd_cert.sigma_gamma_v +
                                 alpha_c * alpha_c * n_c);
  return cert::completeness(cfg.cert_window, mu, sigma,
                            cfg.adc_cert.bin_width_v());
}

double solve_source_mean_for_pass(const ProtocolConfig& cfg, double target) {
  if (!(target > 0.0 && target < 1.0))
    throw std::invalid_argument("solve_source_mean_for_pass: target in (0,1)");
  // Mean whose certification voltage sits at the window center: the curve is
  // increasing in [0, center], so bisect there.
  const double center_v = cfg.adc_cert.bin_width_v() *
                          0.5 *
                          static_cast<double>(cfg.cert_window.lo +
                                              cfg.cert_window.hi);
  const double center_mean =
      std::max(center_v, 0.0) / cfg.alpha_c() / cfg.bs_cert.reflectivity;
  double lo = 0.0;
  double hi = std::max(center_mean, 1.0);
  if (analytic_pass_fraction(cfg, hi) < target)
    throw std::runtime_error(
        "solve_source_mean_for_pass: target above the curve maximum");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (analytic_pass_fraction(cfg, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<SweepPoint> eve_sweep(const EveScenario& scenario,
                                  const ProtocolConfig& cfg,
                                  std::int64_t rounds_per_point,
                                  const Rng& rng) {
  if (scenario.eve_powers_w.empty())
    throw std::invalid_argument("eve_sweep: empty sweep");
  scenario.honest.validate();
  scenario.bs_eve.validate();
  const double r_e = scenario.bs_eve.reflectivity;
  std::vector<SweepPoint> out;
  out.reserve(scenario.eve_powers_w.size());
  for (std::size_t k = 0; k < scenario.eve_powers_w.size(); ++k) {
    const double p_eve = scenario.eve_powers_w[k];
    const double eve_mean =
        optics::mean_photons_per_window(p_eve, cfg.window_reference());
    Rng point_rng = rng.child(k);
    std::int64_t passed = 0;
    for (std::int64_t i = 0; i < rounds_per_point; ++i) {
      Rng round_rng = point_rng.child(static_cast<std::uint64_t>(i));
      const std::int64_t n_honest =
          optics::sample_source(scenario.honest, round_rng);
      const std::int64_t kept =
          optics::sample_binomial(n_honest, 1.0 - r_e, round_rng);
      const std::int64_t eve_photons =
          optics::sample_poisson(eve_mean, round_rng);
      const std::int64_t injected =
          optics::sample_binomial(eve_photons, r_e, round_rng);
      const RoundResult r =
          simulate_round_with_source(cfg, kept + injected, round_rng);
      if (r.passed) ++passed;
    }
    SweepPoint pt;
    pt.eve_power_w = p_eve;
    pt.pass_fraction = static_cast<double>(passed) /
                       static_cast<double>(rounds_per_point);
    pt.std_err = std::sqrt(pt.pass_fraction * (1.0 - pt.pass_fraction) /
                           static_cast<double>(rounds_per_point));
    const double total_mean =
        (1.0 - r_e) * scenario.honest.mean() + r_e * eve_mean;
    pt.analytic = analytic_pass_fraction(cfg, total_mean);
    out.push_back(pt);
  }
  return out;
}

const char* to_string(PointStatus s) {
  switch (s) {
    case PointStatus::Ok:
      return "ok";
    case PointStatus::BelowNoiseFloor:
      return "below-noise-floor";
    case PointStatus::Saturated:
      return "saturated";
    case PointStatus::EpsOrderViolated:
      return "eps-order-violated";
  }
  return "unknown";
}

double gamma_tilde_for_policy(const ProtocolConfig& cfg) {
  const double eps_gamma_target =
      (1.0 - cfg.policy.minus_fraction) * cfg.policy.eps_fail_target;
  return std::sqrt(2.0) * cfg.pd_cert.sigma_gamma_v *
         boost::math::erfc_inv(eps_gamma_target);
}

std::vector<SurfacePoint> analyze_hmin_surface(const ProtocolConfig& cfg,
                                               std::span<const double> powers_w,
                                               std::span<const double> r0s) {
  if (powers_w.empty() || r0s.empty())
    throw std::invalid_argument("analyze_hmin_surface: empty sweep");
  const double alpha_c = cfg.alpha_c();
  const double alpha_d = cfg.alpha_d();
  const double delta_v = cfg.adc.bin_width_v();
  const double delta_vc = cfg.adc_cert.bin_width_v();
  const double r1 = cfg.bs_cert.reflectivity;
  const double gamma_tilde = gamma_tilde_for_policy(cfg);
  const double eps_minus_target =
      cfg.policy.minus_fraction * cfg.policy.eps_fail_target;
  const std::int64_t n_r_plus = cfg.n_r_plus();
  const cert::IntInterval rails{cfg.adc_cert.min_bin(), cfg.adc_cert.max_bin()};

  std::vector<SurfacePoint> out;
  out.reserve(powers_w.size() * r0s.size());
  for (const double power : powers_w) {
    const double n_src =
        optics::mean_photons_per_window(power, cfg.window_reference());
    const double n_c_mean = r1 * n_src;
    const double mu_vc = alpha_c * n_c_mean;
    const double sigma_vc =
        std::sqrt(cfg.pd_cert.sigma_gamma_v * cfg.pd_cert.sigma_gamma_v +
                  alpha_c * alpha_c * n_c_mean);

    // Certification-side quantities, shared by every r0 at this power.
    PointStatus status = PointStatus::Ok;
    std::int64_t n_c_minus = 0, n_c_plus = 0, n_r_minus = 0;
    double eps_minus_val = 0.0, eps_plus_val = 0.0;
    const auto window = cert::solve_cert_window(
        cfg.policy.eps_c_target, mu_vc, sigma_vc, delta_vc, rails);
    if (!window) {
      status = PointStatus::Saturated;  // window pinned at the ADC rails
    } else {
      const double lo_edge =
          delta_vc * (static_cast<double>(window->lo) - 0.5);
      const double hi_edge =
          delta_vc * (static_cast<double>(window->hi) + 0.5);
      n_c_minus = static_cast<std::int64_t>(
          std::floor((lo_edge - gamma_tilde) / alpha_c));
      n_c_plus = static_cast<std::int64_t>(
          std::ceil((hi_edge + gamma_tilde) / alpha_c));
      if (n_c_minus < 1) {
        status = PointStatus::BelowNoiseFloor;
      } else {
        const auto solved =
            cert::solve_nr_minus(n_c_minus, r1, eps_minus_target);
        if (solved.status != cert::SolveResult::Status::Found) {
          status = PointStatus::BelowNoiseFloor;
        } else {
          n_r_minus = solved.n_r_minus;
          eps_minus_val = solved.achieved_eps;
          const double n_r_mean = (1.0 - r1) * n_src;
          if (n_r_mean > static_cast<double>(n_r_plus) ||
              n_r_minus >= n_r_plus) {
            status = PointStatus::Saturated;
          } else {
            eps_plus_val = cert::epsilon_plus(
                n_r_plus, n_c_plus + n_r_plus + 1, r1);
            if (eps_plus_val > eps_minus_val)
              status = PointStatus::EpsOrderViolated;
          }
        }
      }
    }

    for (const double r0 : r0s) {
      SurfacePoint pt;
      pt.power_w = power;
      pt.r0 = r0;
      pt.status = status;
      pt.n_c_minus = n_c_minus;
      pt.n_c_plus = n_c_plus;
      pt.n_r_minus = n_r_minus;
      pt.n_r_plus = n_r_plus;
      pt.eps_minus = eps_minus_val;
      pt.eps_plus = eps_plus_val;
      if (status == PointStatus::Ok && r0 > 0.0 && r0 < 1.0) {
        const auto n = static_cast<double>(n_r_minus);
        const bool gaussian_ok =
            n > 1e5 && r0 * n > 5.0 && (1.0 - r0) * n > 5.0;
        const auto rep = cert::min_entropy_sdi(
            1, n_r_minus, r0, delta_v, alpha_d,
            gaussian_ok ? cert::PguessMode::Gaussian
                        : cert::PguessMode::Exact);
        pt.kappa_per_sample = rep.h_min_per_sample;
      }
      out.push_back(pt);
    }
  }
  return out;
}

double r_squared(std::span<const SweepPoint> points) {
  if (points.size() < 2) return 0.0;
  double mean = 0.0;
  for (const auto& p : points) mean += p.pass_fraction;
  mean /= static_cast<double>(points.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : points) {
    ss_res += (p.pass_fraction - p.analytic) * (p.pass_fraction - p.analytic);
    ss_tot += (p.pass_fraction - mean) * (p.pass_fraction - mean);
  }
  return ss_tot == 0.0 ? 0.0 : 1.0 - ss_res / ss_tot;
}

}  // namespace sdiqrng::pipeline
