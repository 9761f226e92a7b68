// Command-line front end: analysis sweeps, protocol runs, attack emulation,
// and a built-in statistical battery with raw bitstream export.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdiqrng/certification.hpp"
#include "sdiqrng/config.hpp"
#include "sdiqrng/models.hpp"
#include "sdiqrng/pipeline.hpp"
#include "sdiqrng/stats.hpp"

namespace {

using nlohmann::json;
using sdiqrng::Rng;
namespace cert = sdiqrng::certification;
namespace cfgns = sdiqrng::config;
namespace ext = sdiqrng::extractor;
namespace pipe = sdiqrng::pipeline;

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output: " + out_path);
  out << text;
}

cfgns::FullConfig load_config(const std::string& path, std::uint64_t seed) {
  if (path.empty())
    return cfgns::load_from_string(cfgns::default_config_json(), seed);
  return cfgns::load(path, seed);
}

// ---------------------------------------------------------------- analyze --

int cmd_analyze(const cfgns::FullConfig& full, const std::string& out,
                const std::string& format) {
  std::vector<double> powers_w;
  for (double p : full.analyze.powers_mw) powers_w.push_back(p * 1e-3);
  std::vector<pipe::SurfacePoint> rows;
  if (!powers_w.empty() && !full.analyze.r0s.empty())
    rows = pipe::analyze_hmin_surface(full.protocol, powers_w,
                                      full.analyze.r0s);
  if (format == "json") {
    json j;
    j["schema_version"] = 1;
    j["command"] = "analyze";
    auto& arr = j["rows"] = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"power_mw", r.power_w * 1e3},
                     {"r0", r.r0},
                     {"kappa_bits_per_sample", r.kappa_per_sample},
                     {"status", pipe::to_string(r.status)},
                     {"n_c_minus", r.n_c_minus},
                     {"n_r_minus", r.n_r_minus},
                     {"n_r_plus", r.n_r_plus},
                     {"eps_minus", r.eps_minus},
                     {"eps_plus", r.eps_plus}});
    }
    emit(j.dump(2) + "\n", out);
    return 0;
  }
  std::ostringstream csv;
  csv << "# sdiqrng analyze v1\n"
      << "power_mw,r0,kappa_bits_per_sample,status,n_c_minus,n_r_minus,"
         "n_r_plus,eps_minus,eps_plus\n";
  for (const auto& r : rows) {
    csv << fmt_g(r.power_w * 1e3) << ',' << fmt_g(r.r0) << ','
        << fmt_g(r.kappa_per_sample) << ',' << pipe::to_string(r.status) << ','
        << r.n_c_minus << ',' << r.n_r_minus << ',' << r.n_r_plus << ','
        << fmt_g(r.eps_minus) << ',' << fmt_g(r.eps_plus) << '\n';
  }
  emit(csv.str(), out);
  return 0;
}

// ---------------------------------------------------------------- compare --

int cmd_compare(const cfgns::FullConfig& full, std::uint64_t seed,
                const std::string& out, const std::string& format) {
  const auto& pc = full.protocol;
  const double r0 = pc.bs_gen.reflectivity;
  const double r1 = pc.bs_cert.reflectivity;
  const double n_src = pc.source.mean();
  const double n_bar_r = (1.0 - r1) * n_src;
  const double alpha_d = pc.alpha_d();
  const double delta_v = pc.adc.bin_width_v();

  std::int64_t n_r_minus = 0;
  if (full.compare.n_r_minus_ratio) {
    n_r_minus = static_cast<std::int64_t>(
        std::llround(n_bar_r / *full.compare.n_r_minus_ratio));
  } else {
    const double power = sdiqrng::optics::power_for_mean_photons(
        n_src, pc.window_reference());
    const double powers[] = {power};
    const double r0s[] = {r0};
    const auto srf = pipe::analyze_hmin_surface(pc, powers, r0s);
    if (srf[0].status != pipe::PointStatus::Ok)
      throw std::runtime_error(std::string("compare: operating point is ") +
                               pipe::to_string(srf[0].status));
    n_r_minus = srf[0].n_r_minus;
  }

  const auto dd = sdiqrng::models::min_entropy_dd(
      n_bar_r, r0, delta_v, alpha_d, static_cast<double>(pc.adc.bits));
  const auto n = static_cast<double>(n_r_minus);
  const bool gaussian_ok = n > 1e5 && r0 * n > 5.0 && (1.0 - r0) * n > 5.0;
  const auto sdi = cert::min_entropy_sdi(
      1, n_r_minus, r0, delta_v, alpha_d,
      gaussian_ok ? cert::PguessMode::Gaussian : cert::PguessMode::Exact);

  // Total relative intensity noise includes the coherent shot floor.
  const double f_total =
      std::sqrt(1.0 / n_bar_r + pc.source.rin_f * pc.source.rin_f);
  const double sigma_nd_sq =
      (pc.pd_a.sigma_gamma_v * pc.pd_a.sigma_gamma_v +
       pc.pd_b.sigma_gamma_v * pc.pd_b.sigma_gamma_v) /
      (alpha_d * alpha_d);
  const auto uhd = sdiqrng::models::uhd_variance(
      {n_bar_r, r0, f_total, sigma_nd_sq});

  // Simulated difference histogram over ENOB bins (passed rounds only).
  const Rng rng(seed);
  std::map<std::int64_t, std::int64_t> hist;
  std::int64_t passed = 0;
  for (std::int64_t i = 0; i < full.compare.histogram_rounds; ++i) {
    Rng round_rng = rng.child(static_cast<std::uint64_t>(i));
    const auto r = pipe::simulate_round(pc, round_rng);
    if (!r.passed) continue;
    ++passed;
    ++hist[*r.diff_bin];
  }
  if (passed == 0) throw std::runtime_error("compare: no rounds passed");

  // Analytic per-bin curves, centered like the AC-coupled measurement.
  const double sigma_q_v = alpha_d * std::sqrt(4.0 * r0 * (1.0 - r0) * n_bar_r);
  const double sigma_a_v = alpha_d * std::sqrt(sdi.sigma_a_sq);
  auto gauss_bin = [&](std::int64_t bin, double sigma_v) {
    const double a = (delta_v * (static_cast<double>(bin) - 0.5)) / sigma_v;
    const double b = (delta_v * (static_cast<double>(bin) + 0.5)) / sigma_v;
    return 0.5 * (std::erf(b / std::sqrt(2.0)) - std::erf(a / std::sqrt(2.0)));
  };

  const std::int64_t lo = hist.begin()->first;
  const std::int64_t hi = hist.rbegin()->first;
  json bins = json::array();
  for (std::int64_t bin = lo; bin <= hi; ++bin) {
    const auto it = hist.find(bin);
    const double p = it == hist.end()
                         ? 0.0
                         : static_cast<double>(it->second) /
                               static_cast<double>(passed);
    bins.push_back({{"bin", bin},
                    {"measured", p},
                    {"dd_model", gauss_bin(bin, sigma_q_v)},
                    {"sdi_model", gauss_bin(bin, sigma_a_v)}});
  }

  json j;
  j["schema_version"] = 1;
  j["command"] = "compare";
  j["r0"] = r0;
  j["n_bar_r_photons"] = n_bar_r;
  j["n_r_minus_photons"] = n_r_minus;
  j["n_ratio"] = n_bar_r / static_cast<double>(n_r_minus);
  j["h_min_dd_bits"] = dd.bits;
  j["h_min_dd_capped"] = dd.capped;
  j["h_min_sdi_bits"] = sdi.h_min_per_sample;
  j["lambda_bits"] = dd.bits - sdi.h_min_per_sample;
  j["lambda_ideal_bits"] =
      sdiqrng::models::lambda_ideal(n_bar_r, static_cast<double>(n_r_minus));
  j["uhd_variance_photons_sq"] = {{"lo_term", uhd.lo_term},
                                  {"vacuum_term", uhd.vacuum_term},
                                  {"electronic_term", uhd.electronic_term},
                                  {"total", uhd.total}};
  j["histogram_rounds"] = full.compare.histogram_rounds;
  j["histogram_passed"] = passed;
  j["bins"] = bins;

  if (format == "csv") {
    std::ostringstream csv;
    csv << "# sdiqrng compare v1\n";
    csv << "# h_min_dd_bits," << fmt_g(dd.bits) << "\n";
    csv << "# h_min_sdi_bits," << fmt_g(sdi.h_min_per_sample) << "\n";
    csv << "# lambda_bits," << fmt_g(dd.bits - sdi.h_min_per_sample) << "\n";
    csv << "bin,measured,dd_model,sdi_model\n";
    for (const auto& b : bins) {
      csv << b["bin"].get<std::int64_t>() << ','
          << fmt_g(b["measured"].get<double>()) << ','
          << fmt_g(b["dd_model"].get<double>()) << ','
          << fmt_g(b["sdi_model"].get<double>()) << '\n';
    }
    emit(csv.str(), out);
    return 0;
  }
  emit(j.dump(2) + "\n", out);
  return 0;
}

// -------------------------------------------------------------------- run --

int cmd_run(const cfgns::FullConfig& full, std::uint64_t seed,
            const std::string& out) {
  if (out.empty())
    throw std::runtime_error("run: --out PATH is required (bitstream base)");
  const Rng rng(seed);
  const auto rep = pipe::run_protocol(full.protocol, full.run.total_rounds,
                                      rng);
  ext::write_bits_file(out + ".bin", rep.extracted_bits);

  json j;
  j["schema_version"] = 1;
  j["command"] = "run";
  j["seed"] = seed;
  j["rounds_attempted"] = rep.rounds_attempted;
  j["rounds_passed"] = rep.rounds_passed;
  j["pass_fraction"] = rep.pass_fraction;
  j["blocks_hashed"] = rep.blocks_hashed;
  j["extracted_bits"] = rep.extracted_bits.size();
  j["shortfall"] = rep.shortfall;
  j["security"] = {{"eps_l", rep.security.eps_l},
                   {"eps_total", rep.security.eps_total},
                   {"compression_ratio", rep.security.compression_r},
                   {"bits_per_string", full.protocol.ext.l},
                   {"total_bits_budget", rep.security.big_l}};
  j["rates"] = {{"r_g_bps", rep.rates.r_g_bps},
                {"r_s_bps", rep.rates.r_s_bps},
                {"r_avg_bps", rep.rates.r_avg_bps}};
  j["bitstream_file"] = out + ".bin";
  emit(j.dump(2) + "\n", out + ".json");
  std::cout << "wrote " << rep.extracted_bits.size() / 8 << " bytes to " << out
            << ".bin (" << rep.blocks_hashed << " blocks)\n";
  return 0;
}

// ----------------------------------------------------------------- attack --

int cmd_attack(const cfgns::FullConfig& full, std::uint64_t seed,
               const std::string& out, const std::string& format) {
  pipe::ProtocolConfig pc = full.protocol;
  const auto& atk = full.attack;

  // Operating point: the certification window targets eps_C at this power.
  const double opt_mean = sdiqrng::optics::mean_photons_per_window(
      atk.optimal_power_mw * 1e-3, pc.window_reference());
  {
    const double n_c = pc.bs_cert.reflectivity * opt_mean;
    const double alpha_c = pc.alpha_c();
    const double mu = alpha_c * n_c;
    const double sigma =
        std::sqrt(pc.pd_cert.sigma_gamma_v * pc.pd_cert.sigma_gamma_v +
                  alpha_c * alpha_c * n_c);
    const auto win = cert::solve_cert_window(
        pc.policy.eps_c_target, mu, sigma, pc.adc_cert.bin_width_v(),
        cert::IntInterval{pc.adc_cert.min_bin(), pc.adc_cert.max_bin()});
    if (!win) throw std::runtime_error("attack: no certification window");
    pc.cert_window = *win;
  }

  pipe::EveScenario sc;
  sc.bs_eve.reflectivity = atk.r_e;
  const double honest_mean =
      pipe::solve_source_mean_for_pass(pc, atk.honest_pass_fraction) /
      (1.0 - atk.r_e);
  sc.honest = sdiqrng::optics::SourceModel::coherent(honest_mean);

  if (!atk.eve_powers_uw.empty()) {
    for (double p : atk.eve_powers_uw) sc.eve_powers_w.push_back(p * 1e-6);
  } else {
    // Optimal injection: r_E n_E + (1-r_E) n_H = opt_mean.
    const double eve_opt_mean =
        (opt_mean - (1.0 - atk.r_e) * honest_mean) / atk.r_e;
    const double eve_opt_w = sdiqrng::optics::power_for_mean_photons(
        eve_opt_mean, pc.window_reference());
    const int pts = std::max(3, atk.auto_points | 1);  // odd grid
    for (int i = 0; i < pts; ++i) {
      sc.eve_powers_w.push_back(2.0 * eve_opt_w * i /
                                static_cast<double>(pts - 1));
    }
  }

  const Rng rng(seed);
  const auto points = pipe::eve_sweep(sc, pc, atk.rounds_per_point, rng);
  const double r2 = points.size() >= 2 ? pipe::r_squared(points) : 0.0;

  if (format == "json") {
    json j;
    j["schema_version"] = 1;
    j["command"] = "attack";
    j["r_e"] = atk.r_e;
    j["honest_mean_photons"] = honest_mean;
    j["rounds_per_point"] = atk.rounds_per_point;
    if (points.size() >= 2) j["r_squared"] = r2;
    auto& arr = j["points"] = json::array();
    for (const auto& p : points) {
      arr.push_back({{"eve_power_uw", p.eve_power_w * 1e6},
                     {"pass_fraction", p.pass_fraction},
                     {"std_err", p.std_err},
                     {"analytic", p.analytic}});
    }
    emit(j.dump(2) + "\n", out);
    return 0;
  }
  std::ostringstream csv;
  csv << "# sdiqrng attack v1\n";
  if (points.size() >= 2) csv << "# r_squared," << fmt_g(r2) << "\n";
  csv << "eve_power_uw,pass_fraction,std_err,analytic\n";
  for (const auto& p : points) {
    csv << fmt_g(p.eve_power_w * 1e6) << ',' << fmt_g(p.pass_fraction) << ','
        << fmt_g(p.std_err) << ',' << fmt_g(p.analytic) << '\n';
  }
  emit(csv.str(), out);
  return 0;
}

// ------------------------------------------------------------------ stats --

int cmd_stats(const std::string& bits_path, const std::string& out,
              const std::string& format) {
  constexpr std::size_t kSeqBits = 1000000;
  const auto bits = ext::read_bits_file(bits_path);
  if (bits.size() < kSeqBits)
    throw std::runtime_error(
        "stats: input too short: need at least 1000000 bits, got " +
        std::to_string(bits.size()));
  const std::size_t n_seq = bits.size() / kSeqBits;

  struct Agg {
    std::vector<double> ps;
    int passed = 0;
  };
  std::map<std::string, Agg> agg;
  json entries = json::array();
  for (std::size_t s = 0; s < n_seq; ++s) {
    ext::BitVec seq(kSeqBits);
    for (std::size_t i = 0; i < kSeqBits; ++i)
      seq.set(i, bits.get(s * kSeqBits + i));
    for (const auto& r : sdiqrng::stats::run_battery(seq)) {
      agg[r.name].ps.push_back(r.p_value);
      agg[r.name].passed += r.pass;
      entries.push_back({{"sequence", s},
                         {"test", r.name},
                         {"p_value", r.p_value},
                         {"pass", r.pass}});
    }
  }

  json summary = json::array();
  for (const auto& [name, a] : agg) {
    summary.push_back(
        {{"test", name},
         {"proportion", static_cast<double>(a.passed) /
                            static_cast<double>(n_seq)},
         {"uniformity_p", sdiqrng::stats::p_value_uniformity(a.ps)}});
  }

  if (format == "csv") {
    std::ostringstream csv;
    csv << "# sdiqrng stats v1\n";
    csv << "# sequences," << n_seq << "\n";
    for (const auto& srow : summary) {
      csv << "# summary," << srow["test"].get<std::string>() << ','
          << fmt_g(srow["proportion"].get<double>()) << ','
          << fmt_g(srow["uniformity_p"].get<double>()) << "\n";
    }
    csv << "sequence,test,p_value,pass\n";
    for (const auto& e : entries) {
      csv << e["sequence"].get<std::size_t>() << ','
          << e["test"].get<std::string>() << ','
          << fmt_g(e["p_value"].get<double>()) << ','
          << (e["pass"].get<bool>() ? 1 : 0) << '\n';
    }
    emit(csv.str(), out);
    return 0;
  }
  json j;
  j["schema_version"] = 1;
  j["command"] = "stats";
  j["sequences"] = n_seq;
  j["sequence_bits"] = kSeqBits;
  j["summary"] = summary;
  j["entries"] = entries;
  emit(j.dump(2) + "\n", out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-device-independent QRNG simulator and extractor"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string format = "csv";
  std::string bits_path;

  auto add_common = [&](CLI::App* sub, bool with_format = true) {
    sub->add_option("--config", config_path, "JSON config path");
    sub->add_option("--seed", seed, "deterministic RNG seed");
    sub->add_option("--out", out_path, "output path (default stdout)");
    if (with_format)
      sub->add_option("--format", format, "csv or json")
          ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* analyze = app.add_subcommand(
      "analyze", "certified min-entropy over a power x r0 grid");
  add_common(analyze);
  auto* compare = app.add_subcommand(
      "compare", "difference histogram and DD vs SDI entropy comparison");
  add_common(compare);
  auto* run = app.add_subcommand(
      "run", "full protocol run: simulate, certify, hash, export bits");
  add_common(run, false);
  auto* attack = app.add_subcommand(
      "attack", "light-injection sweep of the certification test");
  add_common(attack);
  auto* stats = app.add_subcommand(
      "stats", "statistical battery over an exported bitstream");
  stats->add_option("bitstream", bits_path, "packed bitstream file")
      ->required();
  stats->add_option("--out", out_path, "output path (default stdout)");
  stats->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  auto* defcfg = app.add_subcommand(
      "default-config", "print the built-in configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (defcfg->parsed()) {
      std::cout << sdiqrng::config::default_config_json() << "\n";
      return 0;
    }
    if (stats->parsed()) return cmd_stats(bits_path, out_path, format);
    const auto full = load_config(config_path, seed);
    if (analyze->parsed()) return cmd_analyze(full, out_path, format);
    if (compare->parsed()) {
      const std::string fmt = compare->count("--format") ? format : "json";
      return cmd_compare(full, seed, out_path, fmt);
    }
    if (run->parsed()) return cmd_run(full, seed, out_path);
    if (attack->parsed()) return cmd_attack(full, seed, out_path, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
