#include "sdiqrng/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sdiqrng::config {
namespace {

using nlohmann::json;

/// JSON accessor that tracks its path for error messages.
class Cursor {
 public:
  Cursor(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  Cursor at(const std::string& key) const {
    if (!j_->is_object() || !j_->contains(key))
      throw ConfigError("missing field: " + join(key));
    return Cursor((*j_)[key], join(key));
  }

  std::optional<Cursor> maybe(const std::string& key) const {
    if (!j_->is_object() || !j_->contains(key) || (*j_)[key].is_null())
      return std::nullopt;
    return Cursor((*j_)[key], join(key));
  }

  double num() const {
    if (!j_->is_number()) throw ConfigError("expected number at " + path_);
    return j_->get<double>();
  }
  std::int64_t integer() const {
    if (!j_->is_number_integer())
      throw ConfigError("expected integer at " + path_);
    return j_->get<std::int64_t>();
  }
  std::string str() const {
    if (!j_->is_string()) throw ConfigError("expected string at " + path_);
    return j_->get<std::string>();
  }
  std::vector<double> num_array() const {
    if (!j_->is_array()) throw ConfigError("expected array at " + path_);
    std::vector<double> out;
    for (const auto& v : *j_) {
      if (!v.is_number())
        throw ConfigError("expected numeric array at " + path_);
      out.push_back(v.get<double>());
    }
    return out;
  }
  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }

 private:
  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  const json* j_;
  std::string path_;
};

optics::DetectorModel parse_detector(const Cursor& c) {
  optics::DetectorModel d;
  d.bandwidth_hz = c.at("bandwidth_mhz").num() * 1e6;
  d.responsivity_a_per_w = c.at("responsivity_a_per_w").num();
  d.gain_ohm = c.at("gain_kohm").num() * 1e3;
  d.wavelength_m = c.at("wavelength_nm").num() * 1e-9;
  d.sigma_gamma_v = c.at("sigma_gamma_mv").num() * 1e-3;
  const double sat_w = c.at("sat_power_mw").num() * 1e-3;
  d.sat_photons = static_cast<std::int64_t>(
      std::llround(optics::mean_photons_per_window(sat_w, d)));
  d.validate();
  return d;
}

optics::AdcModel parse_adc(const Cursor& c) {
  optics::AdcModel a;
  a.bits = static_cast<int>(c.at("bits").integer());
  a.enob = c.at("enob").num();
  a.v_min = c.at("v_min_v").num();
  a.v_max = c.at("v_max_v").num();
  a.sample_rate_hz = c.at("sample_rate_msps").num() * 1e6;
  a.validate();
  return a;
}

optics::SourceModel parse_source(const Cursor& c,
                                 const optics::DetectorModel& window_ref) {
  const std::string kind = c.at("kind").str();
  auto mean_photons = [&]() -> double {
    if (auto n = c.maybe("mean_photons")) return n->num();
    if (auto p = c.maybe("power_mw"))
      return optics::mean_photons_per_window(p->num() * 1e-3, window_ref);
    throw ConfigError("source needs mean_photons or power_mw at " + c.path());
  };
  if (kind == "fock") {
    return optics::SourceModel::fock(c.at("photons").integer());
  }
  if (kind == "coherent") {
    double rin = 0.0;
    if (auto r = c.maybe("rin_f")) rin = r->num();
    return optics::SourceModel::coherent(mean_photons(), rin);
  }
  if (kind == "thermal_ase") {
    int s = 1;
    if (auto sv = c.maybe("polarization_s"))
      s = static_cast<int>(sv->integer());
    return optics::SourceModel::thermal_ase(mean_photons(),
                                            c.at("modes").num(), s);
  }
  throw ConfigError("unknown source kind '" + kind + "' at " + c.path());
}

FullConfig parse(const json& root, std::uint64_t seed) {
  Cursor top(root, "");
  if (top.at("schema_version").integer() != 1)
    throw ConfigError("unsupported schema_version (expected 1)");

  FullConfig out;
  auto& pc = out.protocol;
  const Cursor proto = top.at("protocol");

  pc.pd_cert = parse_detector(proto.at("pd_cert"));
  pc.pd_a = parse_detector(proto.at("pd_a"));
  pc.pd_b = parse_detector(proto.at("pd_b"));
  pc.adc = parse_adc(proto.at("adc_diff"));
  pc.adc_cert = parse_adc(proto.at("adc_cert"));
  pc.bs_cert.reflectivity = proto.at("bs_cert_reflectivity").num();
  pc.bs_gen.reflectivity = proto.at("bs_gen_reflectivity").num();
  pc.source = parse_source(proto.at("source"), pc.window_reference());
  pc.hash_rate_hz = proto.at("hash_rate_mhz").num() * 1e6;

  const Cursor pol = proto.at("policy");
  pc.policy.eps_fail_target = pol.at("eps_fail_target").num();
  pc.policy.minus_fraction = pol.at("minus_fraction").num();
  pc.policy.eps_c_target = pol.at("eps_c_target").num();
  pc.policy.kappa_bits_per_sample = pol.at("kappa_bits_per_sample").num();
  if (auto nrp = pol.maybe("n_r_plus_override"))
    pc.policy.n_r_plus_override = nrp->integer();

  const Cursor ext = proto.at("extractor");
  pc.ext.l = ext.at("l_bits").integer();
  pc.ext.b = ext.at("b_bits").integer();
  pc.ext.m = ext.at("m_samples").integer();
  pc.ext.h = pc.ext.m * pc.ext.b;
  pc.ext.t = ext.at("t_hash_cycles").integer();
  pc.ext.eps_hash = ext.at("eps_hash").num();
  pc.policy.m = pc.ext.m;

  const auto seed_bits = static_cast<std::size_t>(pc.ext.l + pc.ext.h - 1);
  if (auto sf = top.maybe("seed_file")) {
    out.seed_file = sf->str();
    pc.ext.seed = extractor::read_seed_file(*out.seed_file, seed_bits);
  } else {
    // Derived pseudorandomly from the CLI seed; not a cryptographic source.
    Rng seed_rng(seed ^ 0x5eedf11eULL);
    pc.ext.seed = extractor::BitVec::random(seed_bits, seed_rng);
  }

  if (auto w = proto.maybe("workers"))
    pc.workers = static_cast<int>(w->integer());

  const Cursor win = proto.at("cert_window");
  if (win.raw().is_string() && win.str() == "auto") {
    const double n_c = pc.bs_cert.reflectivity * pc.source.mean();
    const double alpha_c = pc.alpha_c();
    const double mu = alpha_c * n_c;
    const double sigma =
        std::sqrt(pc.pd_cert.sigma_gamma_v * pc.pd_cert.sigma_gamma_v +
                  alpha_c * alpha_c * n_c);
    const auto solved = certification::solve_cert_window(
        pc.policy.eps_c_target, mu, sigma, pc.adc_cert.bin_width_v(),
        certification::IntInterval{pc.adc_cert.min_bin(),
                                   pc.adc_cert.max_bin()});
    if (!solved)
      throw ConfigError(
          "protocol.cert_window: no window meets the eps_c target at this "
          "operating point (certification channel at the rails)");
    pc.cert_window = *solved;
  } else if (win.raw().is_array() && win.raw().size() == 2) {
    pc.cert_window.lo = win.raw()[0].get<std::int64_t>();
    pc.cert_window.hi = win.raw()[1].get<std::int64_t>();
  } else {
    throw ConfigError("protocol.cert_window must be \"auto\" or [lo, hi]");
  }

  if (auto off = proto.maybe("diff_dc_offset_photons")) {
    pc.diff_dc_offset_photons = off->num();
  } else {
    pc.diff_dc_offset_photons = (2.0 * pc.bs_gen.reflectivity - 1.0) *
                                (1.0 - pc.bs_cert.reflectivity) *
                                pc.source.mean();
  }

  if (auto an = top.maybe("analyze")) {
    out.analyze.powers_mw = an->at("powers_mw").num_array();
    out.analyze.r0s = an->at("r0s").num_array();
  }
  if (auto at = top.maybe("attack")) {
    out.attack.r_e = at->at("r_e").num();
    out.attack.optimal_power_mw = at->at("optimal_power_mw").num();
    out.attack.honest_pass_fraction = at->at("honest_pass_fraction").num();
    if (auto pts = at->maybe("eve_powers_uw"))
      out.attack.eve_powers_uw = pts->num_array();
    if (auto ap = at->maybe("auto_points"))
      out.attack.auto_points = static_cast<int>(ap->integer());
    out.attack.rounds_per_point = at->at("rounds_per_point").integer();
  }
  if (auto cm = top.maybe("compare")) {
    if (auto ratio = cm->maybe("n_r_minus_ratio"))
      out.compare.n_r_minus_ratio = ratio->num();
    if (auto hr = cm->maybe("histogram_rounds"))
      out.compare.histogram_rounds = hr->integer();
  }
  if (auto rn = top.maybe("run"))
    out.run.total_rounds = rn->at("total_rounds").integer();

  pc.validate();
  return out;
}

}  // namespace

FullConfig load_from_string(const std::string& text, std::uint64_t seed) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse(root, seed);
}

FullConfig load(const std::filesystem::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_from_string(buf.str(), seed);
}

std::string default_config_json() {
  return R"({
  "schema_version": 1,
  "protocol": {
    "source": {"kind": "coherent", "power_mw": 3.43, "rin_f": 0.0},
    "bs_cert_reflectivity": 0.109,
    "bs_gen_reflectivity": 0.513,
    "pd_cert": {"bandwidth_mhz": 110.0, "responsivity_a_per_w": 1.03,
                "gain_kohm": 3.9, "wavelength_nm": 1550.0,
                "sigma_gamma_mv": 2.0, "sat_power_mw": 0.6},
    "pd_a": {"bandwidth_mhz": 100.0, "responsivity_a_per_w": 0.9,
             "gain_kohm": 39.0, "wavelength_nm": 1550.0,
             "sigma_gamma_mv": 1.0, "sat_power_mw": 2.0},
    "pd_b": {"bandwidth_mhz": 100.0, "responsivity_a_per_w": 0.9,
             "gain_kohm": 39.0, "wavelength_nm": 1550.0,
             "sigma_gamma_mv": 1.0, "sat_power_mw": 2.0},
    "adc_diff": {"bits": 14, "enob": 11.83, "v_min_v": -1.0, "v_max_v": 1.0,
                 "sample_rate_msps": 125.0},
    "adc_cert": {"bits": 14, "enob": 11.83, "v_min_v": -20.0, "v_max_v": 20.0,
                 "sample_rate_msps": 125.0},
    "hash_rate_mhz": 125.0,
    "policy": {"eps_fail_target": 5e-19, "minus_fraction": 0.5,
               "eps_c_target": 0.008, "kappa_bits_per_sample": 3.354},
    "extractor": {"l_bits": 512, "b_bits": 14, "m_samples": 183,
                  "t_hash_cycles": 2500, "eps_hash": 2.33e-16},
    "cert_window": "auto",
    "workers": 1
  },
  "analyze": {
    "powers_mw": [0.01, 0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.31,
                  1.6, 2.0, 2.5, 3.0, 3.43, 4.0, 5.0, 6.0],
    "r0s": [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0]
  },
  "attack": {"r_e": 0.0105, "optimal_power_mw": 0.2,
             "honest_pass_fraction": 0.005, "auto_points": 17,
             "rounds_per_point": 100000},
  "compare": {"n_r_minus_ratio": 1.0154, "histogram_rounds": 200000},
  "run": {"total_rounds": 1000000}
})";
}

}  // namespace sdiqrng::config
