// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS / FAIL / SOFT-FAIL line. Run with no arguments for the whole
// suite or with a criterion number (1..11) for one check.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sdiqrng/certification.hpp"
#include "sdiqrng/config.hpp"
#include "sdiqrng/extractor.hpp"
#include "sdiqrng/models.hpp"
#include "sdiqrng/optics.hpp"
#include "sdiqrng/pipeline.hpp"
#include "sdiqrng/rng.hpp"
#include "sdiqrng/stats.hpp"

using namespace sdiqrng;
namespace cert = sdiqrng::certification;
namespace ext = sdiqrng::extractor;
namespace pipe = sdiqrng::pipeline;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes << " FAILED[" << what << "]";
    }
  }
  void note(const std::string& s) { notes << " " << s; }
};

bool close_rel(double got, double want, double rel) {
  return std::abs(got - want) <= rel * std::abs(want);
}

pipe::ProtocolConfig reference_config() {
  return config::load_from_string(config::default_config_json(), 1).protocol;
}

// Reference-hardware voltage constants: ENOB bin width of the +-1 V difference
// channel and the generation-detector conversion factor.
const double kDeltaV = 2.0 / std::exp2(11.83);
const double kAlphaD = 6.62607015e-34 * 299792458.0 * 100e6 * 0.9 * 39e3 /
                       1550e-9;

// ------------------------------------------------------------------ C1 --

bool c1(Check& c) {
  const auto s = ext::composable_epsilon(2500, 2.33e-16, 183, 5e-19, 512, 2562);
  c.expect(close_rel(s.eps_l, 3.25e-16, 5e-3), "eps_l vs 3.25e-16");
  c.expect(close_rel(s.eps_total, 8.12e-13, 5e-3), "eps vs 8.12e-13");
  char buf[128];
  std::snprintf(buf, sizeof buf, "eps_l=%.4g eps=%.4g", s.eps_l, s.eps_total);
  c.note(buf);
  return c.ok;
}

// ------------------------------------------------------------------ C2 --

bool c2(Check& c) {
  const auto r = ext::rates(125e6, 125e6, 3.354, 14, 512.0 / 2562.0, 0.008);
  c.expect(close_rel(r.r_g_bps, 0.419e9, 5e-3), "R_G vs 0.419 Gb/s");
  c.expect(close_rel(r.r_s_bps, 0.350e9, 5e-3), "R_S vs 0.350 Gb/s");
  c.expect(close_rel(r.r_avg_bps, 0.347e9, 5e-3), "<R> vs 0.347 Gb/s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "R_G=%.4g R_S=%.4g <R>=%.4g", r.r_g_bps,
                r.r_s_bps, r.r_avg_bps);
  c.note(buf);
  return c.ok;
}

// ------------------------------------------------------------------ C3 --

bool c3(Check& c) {
  const double kappa = 183.0 * 3.354;
  const double implied = ext::eps_hash_for_length(512, kappa);
  c.expect(implied > 0.5 * 2.33e-16 && implied < 2.0 * 2.33e-16,
           "inverse eps_hash within 2x of 2.33e-16");
  const auto fwd = ext::derive_output_length(kappa, 2.33e-16);
  c.expect(fwd.l == 511, "forward floor yields 511");
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "inverse eps_hash=%.4g; forward floor l=%lld while the "
                "deployed block uses l=512 (documented +-1 from kappa "
                "rounding)",
                implied, static_cast<long long>(fwd.l));
  c.note(buf);
  return c.ok;
}

// ------------------------------------------------------------------ C4 --

bool c4(Check& c) {
  const auto pc = reference_config();
  std::vector<double> powers_w;
  for (double mw : {0.005, 0.02, 0.1, 0.5, 1.0, 1.31, 2.0, 2.5, 3.0, 3.43,
                    4.2, 5.0, 6.0})
    powers_w.push_back(mw * 1e-3);
  std::vector<double> r0s;
  for (double r = 0.5; r <= 1.0001; r += 0.05) r0s.push_back(r);
  const auto pts = pipe::analyze_hmin_surface(pc, powers_w, r0s);
  const std::size_t nr = r0s.size();
  auto at = [&](std::size_t pi, std::size_t ri) { return pts[pi * nr + ri]; };

  // r0 = 1 yields zero everywhere.
  for (std::size_t pi = 0; pi < powers_w.size(); ++pi)
    c.expect(at(pi, nr - 1).kappa_per_sample == 0.0, "kappa(r0=1) == 0");

  // kappa is maximal at r0 = 0.5 on every certified row.
  for (std::size_t pi = 0; pi < powers_w.size(); ++pi) {
    double best = -1.0;
    std::size_t best_ri = 0;
    for (std::size_t ri = 0; ri < nr; ++ri) {
      if (at(pi, ri).kappa_per_sample > best) {
        best = at(pi, ri).kappa_per_sample;
        best_ri = ri;
      }
    }
    if (at(pi, 0).status == pipe::PointStatus::Ok)
      c.expect(best_ri == 0, "kappa maximal at r0=0.5");
  }

  // 2.00 mW: kappa(0.9) / kappa(0.5) in [0.65, 0.85].
  const std::size_t p2 = 6;  // index of 2.0 mW
  const double k05 = at(p2, 0).kappa_per_sample;
  const double k09 = at(p2, 8).kappa_per_sample;
  c.expect(at(p2, 0).status == pipe::PointStatus::Ok, "2 mW row certified");
  c.expect(k05 > 0.0, "kappa(0.5) > 0 at 2 mW");
  const double ratio = k09 / k05;
  c.expect(ratio >= 0.65 && ratio <= 0.85, "kappa(0.9)/kappa(0.5) in window");

  // Zero-entropy statuses at the extremes.
  c.expect(at(0, 0).status == pipe::PointStatus::BelowNoiseFloor,
           "below-noise-floor at lowest power");
  c.expect(at(0, 0).kappa_per_sample == 0.0, "kappa zero below noise floor");
  const auto high = at(powers_w.size() - 1, 0);
  c.expect(high.status == pipe::PointStatus::Saturated ||
               high.status == pipe::PointStatus::EpsOrderViolated,
           "saturated/eps-order zero at highest power");
  c.expect(high.kappa_per_sample == 0.0, "kappa zero above saturation");

  char buf[128];
  std::snprintf(buf, sizeof buf, "kappa(0.5)=%.3f kappa(0.9)=%.3f ratio=%.3f",
                k05, k09, ratio);
  c.note(buf);
  return c.ok;
}

// ------------------------------------------------------------------ C5 --

bool c5(Check& c) {
  // The randomness-arm mean is not published; infer it from the DD bound at
  // r0=0.7 and hold the certified ratio at 1.0154.
  const double target_dd = 3.957;
  double lo = 1e6, hi = 1e12;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (models::min_entropy_dd(mid, 0.7, kDeltaV, kAlphaD).bits < target_dd)
      lo = mid;
    else
      hi = mid;
  }
  const double n_bar_r = std::sqrt(lo * hi);
  const auto n_r_minus = static_cast<std::int64_t>(
      std::llround(n_bar_r / 1.0154));

  const double dd = models::min_entropy_dd(n_bar_r, 0.7, kDeltaV, kAlphaD).bits;
  const double sdi = cert::min_entropy_sdi(1, n_r_minus, 0.7, kDeltaV, kAlphaD,
                                           cert::PguessMode::Gaussian)
                         .h_min_per_sample;
  const double gap = dd - sdi;
  c.expect(gap >= 0.9 && gap <= 1.1, "H_DD - H_SDI in [0.9, 1.1]");
  c.expect(std::abs(dd - 3.957) <= 0.3, "H_DD within 0.3 of 3.957");
  c.expect(std::abs(sdi - 2.946) <= 0.3, "H_SDI within 0.3 of 2.946");
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "inferred n_bar_R=%.4g -> H_DD=%.3f H_SDI=%.3f gap=%.3f",
                n_bar_r, dd, sdi, gap);
  c.note(buf);
  return c.ok;
}

// ------------------------------------------------------------------ C6 --

bool c6(Check& c) {
  const double gap = models::lambda_enob(1e12, 1e12, 0.7, kDeltaV, kAlphaD);
  c.expect(std::abs(gap - 1.0) <= 1e-3, "Lambda_ENOB asymptote");
  char buf[64];
  std::snprintf(buf, sizeof buf, "Lambda=%.6f", gap);
  c.note(buf);
  return c.ok;
}

// ------------------------------------------------------------------ C7 --

std::vector<double> binom_pmf_rec(std::int64_t n, double r) {
  std::vector<double> pmf(static_cast<std::size_t>(n + 1), 0.0);
  pmf[0] = std::pow(1.0 - r, static_cast<double>(n));
  for (std::int64_t k = 1; k <= n; ++k)
    pmf[static_cast<std::size_t>(k)] = pmf[static_cast<std::size_t>(k - 1)] *
                                       (static_cast<double>(n - k + 1) /
                                        static_cast<double>(k)) *
                                       (r / (1.0 - r));
  return pmf;
}

bool c7(Check& c) {
  // Binomial tails vs direct Kahan summation, n <= 1e4, 1e-12 relative.
  {
    Rng rng(71);
    for (int i = 0; i < 500; ++i) {
      const auto n = static_cast<std::int64_t>(2 + rng.uniform() * 9998);
      const auto k =
          static_cast<std::int64_t>(rng.uniform() * static_cast<double>(n));
      const double p = 0.02 + 0.96 * rng.uniform();
      const auto pmf = binom_pmf_rec(n, p);
      double sum = 0.0, comp = 0.0;
      for (std::int64_t j = n; j >= k; --j) {
        const double y = pmf[static_cast<std::size_t>(j)] - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
      }
      if (sum < 1e-280) continue;  // below meaningful double resolution
      const double got = cert::binomial_upper_tail(k, n, p);
      if (!close_rel(got, sum, 1e-12)) {
        c.expect(false, "binomial tail vs direct summation");
        break;
      }
    }
  }

  // p_guess exact vs all-paths enumeration, n <= 20.
  for (std::int64_t n = 1; n <= 20 && c.ok; ++n) {
    for (double r0 : {0.3, 0.5, 0.7}) {
      std::vector<double> by_x(static_cast<std::size_t>(2 * n + 1), 0.0);
      const auto paths = std::uint64_t{1} << n;
      for (std::uint64_t mask = 0; mask < paths; ++mask) {
        double w = 1.0;
        for (std::int64_t b = 0; b < n; ++b)
          w *= ((mask >> b) & 1u) ? r0 : (1.0 - r0);
        by_x[static_cast<std::size_t>(2 * std::popcount(mask))] += w;
      }
      const std::int64_t mu = cert::peak_diff_outcome(n, r0);
      for (const auto& w : {cert::IntInterval{mu, mu},
                            cert::IntInterval{mu - 2, mu + 1},
                            cert::IntInterval{-n, n}}) {
        double want = 0.0;
        for (std::int64_t x = std::max(w.lo, -n); x <= std::min(w.hi, n); ++x)
          want += by_x[static_cast<std::size_t>(x + n)];
        if (!close_rel(cert::guessing_prob_exact(n, r0, w), want, 1e-10)) {
          c.expect(false, "p_guess vs enumeration");
          break;
        }
      }
    }
  }

  // Peak outcome vs brute-force pmf argmax, n <= 200, nine r0 values.
  for (double r0 : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
    for (std::int64_t n = 1; n <= 200 && c.ok; ++n) {
      const auto pmf = binom_pmf_rec(n, r0);
      const std::int64_t mu = cert::peak_diff_outcome(n, r0);
      const double got = pmf[static_cast<std::size_t>((mu + n) / 2)];
      const double best = *std::max_element(pmf.begin(), pmf.end());
      if (!close_rel(got, best, 1e-12)) {
        c.expect(false, "mu_x vs argmax");
        break;
      }
    }
  }

  // Toeplitz: streaming vs block vs naive, 1000 random cases; linearity.
  {
    Rng rng(72);
    for (int i = 0; i < 1000 && c.ok; ++i) {
      const std::int64_t l = 1 + static_cast<std::int64_t>(rng.uniform() * 64);
      const std::int64_t b = 1 + static_cast<std::int64_t>(rng.uniform() * 16);
      std::int64_t m = 1 + static_cast<std::int64_t>(
                               rng.uniform() * std::max<std::int64_t>(
                                                   1, 128 / b));
      while (m * b < l) ++m;
      ext::ExtractorConfig cfg;
      cfg.l = l;
      cfg.m = m;
      cfg.b = b;
      cfg.h = m * b;
      cfg.t = 1;
      cfg.eps_hash = 0.5;
      cfg.seed = ext::BitVec::random(static_cast<std::size_t>(l + cfg.h - 1),
                                     rng);
      const ext::BitVec input =
          ext::BitVec::random(static_cast<std::size_t>(cfg.h), rng);
      const ext::BitVec naive = ext::toeplitz_hash_naive(cfg, input);
      const ext::ToeplitzHasher hasher(cfg);
      if (!(hasher.hash(input) == naive)) {
        c.expect(false, "block hash vs naive");
        break;
      }
      ext::BitVec acc(static_cast<std::size_t>(l));
      for (std::int64_t k = 0; k < m; ++k) {
        ext::BitVec sample(static_cast<std::size_t>(b));
        for (std::int64_t d = 0; d < b; ++d)
          sample.set(static_cast<std::size_t>(d),
                     input.get(static_cast<std::size_t>(k * b + d)));
        hasher.accumulate_sample(sample, k, acc);
      }
      if (!(acc == naive)) {
        c.expect(false, "streaming vs naive");
        break;
      }
      // GF(2) linearity, exact.
      ext::BitVec x = ext::BitVec::random(static_cast<std::size_t>(cfg.h), rng);
      const ext::BitVec y =
          ext::BitVec::random(static_cast<std::size_t>(cfg.h), rng);
      ext::BitVec hx = hasher.hash(x);
      const ext::BitVec hy = hasher.hash(y);
      x ^= y;
      ext::BitVec hxy = hasher.hash(x);
      hxy ^= hx;
      if (!(hxy == hy)) {
        c.expect(false, "gf2 linearity");
        break;
      }
    }
  }

  // Production geometry: streaming vs block vs naive once.
  {
    Rng rng(73);
    ext::ExtractorConfig cfg;
    cfg.l = 512;
    cfg.m = 183;
    cfg.b = 14;
    cfg.h = 2562;
    cfg.t = 1;
    cfg.eps_hash = 2.33e-16;
    cfg.seed = ext::BitVec::random(3073, rng);
    const ext::BitVec input = ext::BitVec::random(2562, rng);
    const ext::BitVec naive = ext::toeplitz_hash_naive(cfg, input);
    const ext::ToeplitzHasher hasher(cfg);
    c.expect(hasher.hash(input) == naive, "production block vs naive");
  }
  return c.ok;
}

// Low-power operating point on the fine (+-1 V) certification range, with
// the electronic noise set so a 21-bin window peaks at 1 - eps_C = 0.992.
// Used by the Monte Carlo cross-checks, which need a completeness that is
// meaningfully distinct from one.
pipe::ProtocolConfig fine_window_config() {
  pipe::ProtocolConfig pc = reference_config();
  pc.adc_cert = pc.adc;
  const double delta_c = pc.adc_cert.bin_width_v();
  const double z_target = 2.6520698;  // erfinv(0.992) * sqrt(2)
  pc.pd_cert.sigma_gamma_v = 10.5 * delta_c / z_target;
  const std::int64_t center_bin = 150;
  pc.cert_window = {center_bin - 10, center_bin + 10};
  const double mu_opt_v = static_cast<double>(center_bin) * delta_c;
  const double opt_mean = mu_opt_v / pc.alpha_c() / pc.bs_cert.reflectivity;
  pc.source = optics::SourceModel::coherent(opt_mean);
  return pc;
}

// ------------------------------------------------------------------ C8 --

bool c8(Check& c) {
  // (a) Certification pass fraction vs analytic completeness, 1e6 rounds.
  {
    const auto pc = fine_window_config();
    const double analytic = pipe::analytic_pass_fraction(pc, pc.source.mean());
    const std::int64_t rounds = 1000000;
    Rng rng(81);
    std::int64_t passed = 0;
    for (std::int64_t i = 0; i < rounds; ++i) {
      Rng r = rng.child(static_cast<std::uint64_t>(i));
      passed += pipe::simulate_round(pc, r).passed;
    }
    const double frac = static_cast<double>(passed) / rounds;
    const double sigma = std::sqrt(analytic * (1.0 - analytic) / rounds);
    c.expect(std::abs(frac - analytic) <= 3.0 * sigma,
             "pass fraction within 3 sigma of completeness");
    char buf[128];
    std::snprintf(buf, sizeof buf, "pass=%.5f analytic=%.5f (sigma=%.2g)",
                  frac, analytic, sigma);
    c.note(buf);
  }

  // (b) Simulated difference variance vs the UHD formula, 1e6 samples.
  {
    const double n_bar = 1e6;
    const double r0 = 0.7;
    const double f_inj = 2e-3;
    const double sigma_nd = 300.0;
    const auto src = optics::SourceModel::coherent(n_bar, f_inj);
    const optics::BeamSplitter bs{r0};
    Rng rng(82);
    const std::int64_t samples = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t i = 0; i < samples; ++i) {
      Rng r = rng.child(static_cast<std::uint64_t>(i));
      const std::int64_t n = optics::sample_source(src, r);
      const auto s = optics::split(n, bs, r);
      const double d = static_cast<double>(s.reflected - s.transmitted) +
                       r.normal(0.0, sigma_nd);
      sum += d;
      sum_sq += d * d;
    }
    const double mean = sum / static_cast<double>(samples);
    const double var = sum_sq / static_cast<double>(samples) - mean * mean;
    // The UHD ratio f includes the coherent shot floor.
    const double f_total = std::sqrt(1.0 / n_bar + f_inj * f_inj);
    const auto want =
        models::uhd_variance({n_bar, r0, f_total, sigma_nd * sigma_nd});
    c.expect(close_rel(var, want.total, 0.02), "UHD variance within 2%");
    char buf[128];
    std::snprintf(buf, sizeof buf, "sim_var=%.5g model=%.5g", var, want.total);
    c.note(buf);
  }
  return c.ok;
}

// ------------------------------------------------------------------ C9 --

bool c9(Check& c) {
  pipe::ProtocolConfig pc = fine_window_config();
  const double opt_mean = pc.source.mean();

  pipe::EveScenario sc;
  sc.bs_eve.reflectivity = 0.0105;
  const double honest_total = pipe::solve_source_mean_for_pass(pc, 0.005);
  sc.honest = optics::SourceModel::coherent(
      honest_total / (1.0 - sc.bs_eve.reflectivity));
  const double eve_opt_mean =
      (opt_mean - (1.0 - sc.bs_eve.reflectivity) * sc.honest.mean()) /
      sc.bs_eve.reflectivity;
  const double eve_opt_w =
      optics::power_for_mean_photons(eve_opt_mean, pc.window_reference());
  const int npts = 17;
  for (int i = 0; i < npts; ++i)
    sc.eve_powers_w.push_back(2.0 * eve_opt_w * i / (npts - 1));

  const std::int64_t rounds = 100000;
  const auto pts = pipe::eve_sweep(sc, pc, rounds, Rng(91));

  // No-Eve pass fraction sits at the configured 0.5%.
  c.expect(std::abs(pts[0].pass_fraction - 0.005) <
               3.0 * std::max(pts[0].std_err, 1e-4) + 1e-3,
           "no-Eve pass fraction ~ 0.5%");

  // Peak lands on the analytically optimal grid point, at ~0.992.
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].pass_fraction > pts[best].pass_fraction) best = i;
  c.expect(best >= 7 && best <= 9, "empirical peak at the optimal injection");
  const double peak = pts[8].pass_fraction;
  c.expect(std::abs(peak - 0.992) <= 3.0 * pts[8].std_err + 2e-3,
           "peak pass fraction ~ 0.992");

  // The analytic curve is unimodal across the sweep.
  std::size_t a_best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].analytic > pts[a_best].analytic) a_best = i;
  bool unimodal = true;
  for (std::size_t i = 1; i <= a_best; ++i)
    unimodal = unimodal && pts[i].analytic >= pts[i - 1].analytic - 1e-12;
  for (std::size_t i = a_best + 1; i < pts.size(); ++i)
    unimodal = unimodal && pts[i].analytic <= pts[i - 1].analytic + 1e-12;
  c.expect(unimodal, "analytic curve unimodal");
  c.expect(a_best == 8, "analytic optimum at the center grid point");

  const double r2 = pipe::r_squared(pts);
  c.expect(r2 >= 0.99, "R^2 >= 0.99");

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "noEve=%.4f peak=%.4f (target 0.992) R^2=%.5f",
                pts[0].pass_fraction, peak, r2);
  c.note(buf);
  return c.ok;
}

// ----------------------------------------------------------------- C10 --

int c10(Check& c) {
  Rng rng(101);
  ext::ExtractorConfig cfg;
  cfg.l = 512;
  cfg.m = 183;
  cfg.b = 14;
  cfg.h = 2562;
  cfg.t = 2500;
  cfg.eps_hash = 2.33e-16;
  cfg.seed = ext::BitVec::random(3073, rng);
  const ext::ToeplitzHasher hasher(cfg);

  // Correctness of the benchmarked kernel before timing it.
  const ext::BitVec probe = ext::BitVec::random(2562, rng);
  c.expect(hasher.hash(probe) == ext::toeplitz_hash_naive(cfg, probe),
           "kernel correctness");

  const std::size_t n_inputs = 4096;
  const std::size_t in_words = 41;
  std::vector<std::uint64_t> inputs(n_inputs * in_words);
  for (auto& w : inputs) w = rng();
  for (std::size_t i = 0; i < n_inputs; ++i)
    inputs[i * in_words + in_words - 1] &= (std::uint64_t{1} << 2) - 1;

  std::uint64_t acc[8];
  std::uint64_t sink = 0;
  // Warm up, then measure for at least half a second.
  for (std::size_t i = 0; i < n_inputs; ++i) {
    hasher.hash_block(&inputs[i * in_words], acc);
    sink ^= acc[0];
  }
  const auto start = std::chrono::steady_clock::now();
  std::size_t blocks = 0;
  double elapsed = 0.0;
  while (elapsed < 0.5) {
    for (std::size_t i = 0; i < n_inputs; ++i) {
      hasher.hash_block(&inputs[i * in_words], acc);
      sink ^= acc[i & 7];
    }
    blocks += n_inputs;
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();
  }
  const double bps = static_cast<double>(blocks) * 512.0 / elapsed;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%.3f Gb/s output-equivalent on one core (%s kernel, sink %u)",
                bps / 1e9, hasher.uses_clmul() ? "clmul" : "table",
                static_cast<unsigned>(sink & 1));
  c.note(buf);
  if (!c.ok) return 1;
  if (bps >= 0.35e9) return 0;
  c.note("below 0.35 Gb/s: hardware-bound on this machine");
  return 2;  // soft-fail
}

// ----------------------------------------------------------------- C11 --

bool c11(Check& c) {
  pipe::ProtocolConfig pc = reference_config();
  pc.keep_raw_samples = false;
  pc.workers = 2;
  pc.ext.t = 195313;  // just above 1e8 output bits
  const auto rep = pipe::run_protocol(pc, 60000000, Rng(112));
  c.expect(!rep.shortfall, "enough certified rounds for 1e8 bits");
  c.expect(rep.extracted_bits.size() >= 100000000, "1e8 extracted bits");
  if (!c.ok) return false;

  const std::size_t seq_bits = 1000000;
  const int sequences = 100;
  struct Tally {
    std::string name;
    int passed = 0;
  };
  std::vector<Tally> tallies;
  for (int s = 0; s < sequences; ++s) {
    ext::BitVec seq(seq_bits);
    for (std::size_t i = 0; i < seq_bits; ++i)
      seq.set(i, rep.extracted_bits.get(s * seq_bits + i));
    const auto results = stats::run_battery(seq);
    if (tallies.empty())
      for (const auto& r : results) tallies.push_back({r.name, 0});
    for (std::size_t t = 0; t < results.size(); ++t)
      tallies[t].passed += results[t].pass;
  }
  std::ostringstream note;
  for (const auto& t : tallies) {
    c.expect(t.passed >= 95, t.name + " >= 95/100");
    note << " " << t.name << "=" << t.passed;
  }
  c.note(note.str());
  return c.ok;
}

struct Criterion {
  int id;
  const char* title;
  std::function<int(Check&)> run;  // 0 pass, 1 fail, 2 soft-fail
};

int run_criterion(const Criterion& cr) {
  Check c;
  int rc;
  try {
    rc = cr.run(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.notes << " exception: " << e.what();
    rc = 1;
  }
  const char* tag = rc == 0 ? "PASS" : (rc == 2 ? "SOFT-FAIL" : "FAIL");
  std::printf("[%s] C%d %s:%s\n", tag, cr.id, cr.title, c.notes.str().c_str());
  std::fflush(stdout);
  return rc == 1 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto as_bool = [](std::function<bool(Check&)> f) {
    return [f](Check& c) { return f(c) ? 0 : 1; };
  };
  const std::vector<Criterion> all = {
      {1, "composable epsilon arithmetic", as_bool(c1)},
      {2, "rate accounting", as_bool(c2)},
      {3, "output length forward/inverse consistency", as_bool(c3)},
      {4, "min-entropy surface over power and r0", as_bool(c4)},
      {5, "DD vs SDI comparison at r0=0.7", as_bool(c5)},
      {6, "asymptotic 1-bit trust gap", as_bool(c6)},
      {7, "oracle suites (tails, p_guess, peak, Toeplitz)", as_bool(c7)},
      {8, "Monte Carlo vs analytic (completeness, UHD variance)", as_bool(c8)},
      {9, "light-injection sweep", as_bool(c9)},
      {10, "extractor throughput benchmark", [](Check& c) { return c10(c); }},
      {11, "statistical battery on extracted bits", as_bool(c11)},
  };

  int failures = 0;
  if (argc > 1) {
    const int want = std::atoi(argv[1]);
    bool found = false;
    for (const auto& cr : all) {
      if (cr.id == want) {
        failures += run_criterion(cr);
        found = true;
      }
    }
    if (!found) {
      std::fprintf(stderr, "unknown criterion %d\n", want);
      return 2;
    }
  } else {
    for (const auto& cr : all) failures += run_criterion(cr);
  }
  return failures == 0 ? 0 : 1;
}
