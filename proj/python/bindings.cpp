#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sdiqrng/certification.hpp"
#include "sdiqrng/config.hpp"
#include "sdiqrng/extractor.hpp"
#include "sdiqrng/models.hpp"
#include "sdiqrng/optics.hpp"
#include "sdiqrng/pipeline.hpp"
#include "sdiqrng/stats.hpp"

namespace py = pybind11;

using namespace sdiqrng;
namespace cert = sdiqrng::certification;
namespace ext = sdiqrng::extractor;

namespace {

ext::BitVec bitvec_from_bytes(py::bytes data, std::size_t nbits) {
  std::string buf = data;
  return ext::BitVec::from_msb_bytes(
      {reinterpret_cast<const std::uint8_t*>(buf.data()), buf.size()}, nbits);
}

py::bytes bitvec_to_bytes(const ext::BitVec& v) {
  const auto bytes = v.to_msb_bytes();
  return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

}  // namespace

PYBIND11_MODULE(sdiqrng, m) {
  m.doc() = "Source-device-independent QRNG simulator, security calculator, "
            "and Toeplitz randomness extractor";

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("child", &Rng::child, py::arg("key"))
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal, py::arg("mean"), py::arg("stddev"));

  // ------------------------------------------------------------- optics --
  auto om = m.def_submodule("optics");
  py::class_<optics::SourceModel> src(om, "SourceModel");
  src.def_static("fock", &optics::SourceModel::fock, py::arg("n"))
      .def_static("coherent", &optics::SourceModel::coherent, py::arg("n_bar"),
                  py::arg("rin_f") = 0.0)
      .def_static("thermal_ase", &optics::SourceModel::thermal_ase,
                  py::arg("n_bar_total"), py::arg("modes"), py::arg("s"))
      .def("mean", &optics::SourceModel::mean)
      .def_readwrite("rin_f", &optics::SourceModel::rin_f);
  py::class_<optics::BeamSplitter>(om, "BeamSplitter")
      .def(py::init([](double r) {
             optics::BeamSplitter b{r};
             b.validate();
             return b;
           }),
           py::arg("reflectivity"))
      .def_readwrite("reflectivity", &optics::BeamSplitter::reflectivity);
  py::class_<optics::DetectorModel>(om, "DetectorModel")
      .def(py::init([](double bw, double eta, double gain, double lambda,
                       double sigma, std::int64_t sat) {
             optics::DetectorModel d{bw, eta, gain, lambda, sigma, sat};
             d.validate();
             return d;
           }),
           py::arg("bandwidth_hz"), py::arg("responsivity_a_per_w"),
           py::arg("gain_ohm"), py::arg("wavelength_m"),
           py::arg("sigma_gamma_v"), py::arg("sat_photons"))
      .def_readwrite("sigma_gamma_v", &optics::DetectorModel::sigma_gamma_v)
      .def_readwrite("sat_photons", &optics::DetectorModel::sat_photons);
  py::class_<optics::AdcModel>(om, "AdcModel")
      .def(py::init([](int bits, double enob, double v_min, double v_max,
                       double rate) {
             optics::AdcModel a{bits, enob, v_min, v_max, rate};
             a.validate();
             return a;
           }),
           py::arg("bits"), py::arg("enob"), py::arg("v_min"),
           py::arg("v_max"), py::arg("sample_rate_hz"))
      .def("bin_width_v", &optics::AdcModel::bin_width_v)
      .def("min_bin", &optics::AdcModel::min_bin)
      .def("max_bin", &optics::AdcModel::max_bin);
  py::class_<optics::SplitResult>(om, "SplitResult")
      .def_readonly("reflected", &optics::SplitResult::reflected)
      .def_readonly("transmitted", &optics::SplitResult::transmitted);
  om.def("conversion_factor", &optics::conversion_factor);
  om.def("mean_photons_per_window", &optics::mean_photons_per_window,
         py::arg("power_w"), py::arg("detector"));
  om.def("power_for_mean_photons", &optics::power_for_mean_photons);
  om.def("sample_source", &optics::sample_source);
  om.def("split", &optics::split);
  om.def("detect", &optics::detect);
  om.def("quantize", &optics::quantize);
  om.def("quantize_raw", &optics::quantize_raw);

  // ------------------------------------------------------ certification --
  auto cm = m.def_submodule("certification");
  py::class_<cert::IntInterval>(cm, "IntInterval")
      .def(py::init([](std::int64_t lo, std::int64_t hi) {
             return cert::IntInterval{lo, hi};
           }),
           py::arg("lo"), py::arg("hi"))
      .def_readwrite("lo", &cert::IntInterval::lo)
      .def_readwrite("hi", &cert::IntInterval::hi)
      .def("width", &cert::IntInterval::width)
      .def("contains", &cert::IntInterval::contains);
  py::enum_<cert::PguessMode>(cm, "PguessMode")
      .value("Exact", cert::PguessMode::Exact)
      .value("Gaussian", cert::PguessMode::Gaussian);
  py::class_<cert::EntropyReport>(cm, "EntropyReport")
      .def_readonly("p_guess", &cert::EntropyReport::p_guess)
      .def_readonly("kappa_bits", &cert::EntropyReport::kappa_bits)
      .def_readonly("h_min_per_sample", &cert::EntropyReport::h_min_per_sample)
      .def_readonly("mu_x", &cert::EntropyReport::mu_x)
      .def_readonly("window", &cert::EntropyReport::window)
      .def_readonly("sigma_a_sq", &cert::EntropyReport::sigma_a_sq);
  py::enum_<cert::BudgetStatus>(cm, "BudgetStatus")
      .value("Ok", cert::BudgetStatus::Ok)
      .value("EpsOrderViolated", cert::BudgetStatus::EpsOrderViolated);
  py::class_<cert::SecurityBudget>(cm, "SecurityBudget")
      .def_readonly("eps_minus", &cert::SecurityBudget::eps_minus)
      .def_readonly("eps_plus", &cert::SecurityBudget::eps_plus)
      .def_readonly("eps_gamma_c", &cert::SecurityBudget::eps_gamma_c)
      .def_readonly("eps_fail", &cert::SecurityBudget::eps_fail)
      .def_readonly("eps_fail_m", &cert::SecurityBudget::eps_fail_m)
      .def_readonly("status", &cert::SecurityBudget::status);
  py::class_<cert::SolveResult> sr(cm, "SolveResult");
  py::enum_<cert::SolveResult::Status>(sr, "Status")
      .value("Found", cert::SolveResult::Status::Found)
      .value("Unbounded", cert::SolveResult::Status::Unbounded)
      .value("NoSolution", cert::SolveResult::Status::NoSolution);
  sr.def_readonly("status", &cert::SolveResult::status)
      .def_readonly("n_r_minus", &cert::SolveResult::n_r_minus)
      .def_readonly("achieved_eps", &cert::SolveResult::achieved_eps);
  cm.def("peak_diff_outcome", &cert::peak_diff_outcome, py::arg("n"),
         py::arg("r0"));
  cm.def("sdi_window", &cert::sdi_window);
  cm.def("guessing_prob_exact", &cert::guessing_prob_exact);
  cm.def("guessing_prob_gaussian", &cert::guessing_prob_gaussian);
  cm.def("min_entropy_sdi", &cert::min_entropy_sdi, py::arg("m"),
         py::arg("n_r_minus"), py::arg("r0"), py::arg("delta_v"),
         py::arg("alpha_d"), py::arg("mode"));
  cm.def("binomial_upper_tail", &cert::binomial_upper_tail);
  cm.def("epsilon_minus", &cert::epsilon_minus);
  cm.def("epsilon_plus", &cert::epsilon_plus);
  cm.def("epsilon_gamma", &cert::epsilon_gamma);
  cm.def("epsilon_fail", &cert::epsilon_fail, py::arg("eps_minus"),
         py::arg("eps_plus"), py::arg("eps_gamma_c"), py::arg("m"),
         py::arg("eps_c") = 0.0, py::arg("gamma_tilde_c_v") = 0.0,
         py::arg("sigma_gamma_c_v") = 0.0);
  cm.def("solve_nr_minus", &cert::solve_nr_minus);
  cm.def("completeness", &cert::completeness);
  cm.def("solve_cert_window", &cert::solve_cert_window, py::arg("target_eps_c"),
         py::arg("mu_vc"), py::arg("sigma_vc"), py::arg("delta_vc"),
         py::arg("rails") = std::nullopt);

  // ------------------------------------------------------------- models --
  auto mm = m.def_submodule("models");
  py::class_<models::UhdVariance>(mm, "UhdVariance")
      .def_readonly("lo_term", &models::UhdVariance::lo_term)
      .def_readonly("vacuum_term", &models::UhdVariance::vacuum_term)
      .def_readonly("electronic_term", &models::UhdVariance::electronic_term)
      .def_readonly("total", &models::UhdVariance::total);
  py::class_<models::DdEntropy>(mm, "DdEntropy")
      .def_readonly("bits", &models::DdEntropy::bits)
      .def_readonly("capped", &models::DdEntropy::capped);
  mm.def("uhd_variance",
         [](double n_bar_r, double r0, double f, double sigma_nd_sq) {
           return models::uhd_variance({n_bar_r, r0, f, sigma_nd_sq});
         },
         py::arg("n_bar_r"), py::arg("r0"), py::arg("f"),
         py::arg("sigma_nd_sq"));
  mm.def("min_entropy_dd", &models::min_entropy_dd, py::arg("n_bar_r"),
         py::arg("r0"), py::arg("delta_v"), py::arg("alpha_d"),
         py::arg("cap_bits") = std::nullopt);
  mm.def("lambda_ideal", &models::lambda_ideal);
  mm.def("lambda_enob", &models::lambda_enob);
  mm.def("lambda_enob_closed_form", &models::lambda_enob_closed_form);
  mm.def("ase_modes",
         [](double b_opt_hz, double b_pd_hz, int s, double n_bar_total) {
           return models::ase_modes({b_opt_hz, b_pd_hz, s, n_bar_total});
         },
         py::arg("b_opt_hz"), py::arg("b_pd_hz"), py::arg("s") = 1,
         py::arg("n_bar_total") = 0.0);
  mm.def("ase_variance", &models::ase_variance);

  // ---------------------------------------------------------- extractor --
  auto em = m.def_submodule("extractor");
  py::class_<ext::BitVec>(em, "BitVec")
      .def(py::init<std::size_t>(), py::arg("nbits"))
      .def_static("from_bytes", &bitvec_from_bytes, py::arg("data"),
                  py::arg("nbits"))
      .def_static("random", &ext::BitVec::random, py::arg("nbits"),
                  py::arg("rng"))
      .def("to_bytes", &bitvec_to_bytes)
      .def("__len__", &ext::BitVec::size)
      .def("get", &ext::BitVec::get)
      .def("set", &ext::BitVec::set)
      .def("__eq__", [](const ext::BitVec& a, const ext::BitVec& b) {
        return a == b;
      });
  py::class_<ext::ExtractorConfig>(em, "ExtractorConfig")
      .def(py::init([](std::int64_t l, std::int64_t m, std::int64_t b,
                       std::int64_t t, double eps_hash, ext::BitVec seed) {
             ext::ExtractorConfig c;
             c.l = l;
             c.m = m;
             c.b = b;
             c.h = m * b;
             c.t = t;
             c.eps_hash = eps_hash;
             c.seed = std::move(seed);
             c.validate();
             return c;
           }),
           py::arg("l"), py::arg("m"), py::arg("b"), py::arg("t"),
           py::arg("eps_hash"), py::arg("seed"))
      .def_readonly("l", &ext::ExtractorConfig::l)
      .def_readonly("h", &ext::ExtractorConfig::h);
  py::class_<ext::OutputLength>(em, "OutputLength")
      .def_readonly("l", &ext::OutputLength::l)
      .def_readonly("clamped", &ext::OutputLength::clamped);
  py::class_<ext::SecuritySummary>(em, "SecuritySummary")
      .def_readonly("eps_l", &ext::SecuritySummary::eps_l)
      .def_readonly("eps_total", &ext::SecuritySummary::eps_total)
      .def_readonly("compression_r", &ext::SecuritySummary::compression_r)
      .def_readonly("big_l", &ext::SecuritySummary::big_l);
  py::class_<ext::Rates>(em, "Rates")
      .def_readonly("r_g_bps", &ext::Rates::r_g_bps)
      .def_readonly("r_s_bps", &ext::Rates::r_s_bps)
      .def_readonly("r_avg_bps", &ext::Rates::r_avg_bps);
  em.def("derive_output_length", &ext::derive_output_length, py::arg("kappa"),
         py::arg("eps_hash"));
  em.def("eps_hash_for_length", &ext::eps_hash_for_length, py::arg("l"),
         py::arg("kappa"));
  em.def("toeplitz_hash", &ext::toeplitz_hash);
  em.def("toeplitz_hash_naive", &ext::toeplitz_hash_naive);
  em.def("streaming_accumulate", &ext::streaming_accumulate, py::arg("cfg"),
         py::arg("sample"), py::arg("round_index"), py::arg("acc"));
  em.def("composable_epsilon", &ext::composable_epsilon, py::arg("t"),
         py::arg("eps_hash"), py::arg("m"), py::arg("eps_fail"), py::arg("l"),
         py::arg("h"));
  em.def("rates", &ext::rates, py::arg("r_sample_hz"), py::arg("r_hash_hz"),
         py::arg("kappa_per_sample"), py::arg("b"), py::arg("compression_r"),
         py::arg("eps_c"));

  // ------------------------------------------------------------ pipeline --
  auto pm = m.def_submodule("pipeline");
  py::enum_<pipeline::PointStatus>(pm, "PointStatus")
      .value("Ok", pipeline::PointStatus::Ok)
      .value("BelowNoiseFloor", pipeline::PointStatus::BelowNoiseFloor)
      .value("Saturated", pipeline::PointStatus::Saturated)
      .value("EpsOrderViolated", pipeline::PointStatus::EpsOrderViolated);
  py::class_<pipeline::SurfacePoint>(pm, "SurfacePoint")
      .def_readonly("power_w", &pipeline::SurfacePoint::power_w)
      .def_readonly("r0", &pipeline::SurfacePoint::r0)
      .def_readonly("kappa_per_sample",
                    &pipeline::SurfacePoint::kappa_per_sample)
      .def_readonly("status", &pipeline::SurfacePoint::status)
      .def_readonly("n_c_minus", &pipeline::SurfacePoint::n_c_minus)
      .def_readonly("n_r_minus", &pipeline::SurfacePoint::n_r_minus)
      .def_readonly("n_r_plus", &pipeline::SurfacePoint::n_r_plus);
  py::class_<pipeline::RunReport>(pm, "RunReport")
      .def_readonly("rounds_attempted", &pipeline::RunReport::rounds_attempted)
      .def_readonly("rounds_passed", &pipeline::RunReport::rounds_passed)
      .def_readonly("pass_fraction", &pipeline::RunReport::pass_fraction)
      .def_readonly("blocks_hashed", &pipeline::RunReport::blocks_hashed)
      .def_readonly("shortfall", &pipeline::RunReport::shortfall)
      .def_readonly("security", &pipeline::RunReport::security)
      .def_readonly("rates", &pipeline::RunReport::rates)
      .def_property_readonly("extracted_bits",
                             [](const pipeline::RunReport& r) {
                               return bitvec_to_bytes(r.extracted_bits);
                             })
      .def_property_readonly("extracted_bit_count",
                             [](const pipeline::RunReport& r) {
                               return r.extracted_bits.size();
                             });

  // Config-driven entry points: everything the CLI can do, from python.
  pm.def("load_config_json",
         [](const std::string& text, std::uint64_t seed) {
           return config::load_from_string(text, seed).protocol;
         },
         py::arg("json_text"), py::arg("seed") = 1);
  pm.def("default_config_json", &config::default_config_json);
  pm.def("run_protocol",
         [](const pipeline::ProtocolConfig& cfg, std::int64_t total_rounds,
            std::uint64_t seed) {
           return pipeline::run_protocol(cfg, total_rounds, Rng(seed));
         },
         py::arg("config"), py::arg("total_rounds"), py::arg("seed") = 1);
  pm.def("analyze_hmin_surface",
         [](const pipeline::ProtocolConfig& cfg, std::vector<double> powers_w,
            std::vector<double> r0s) {
           return pipeline::analyze_hmin_surface(cfg, powers_w, r0s);
         },
         py::arg("config"), py::arg("powers_w"), py::arg("r0s"));
  pm.def("analytic_pass_fraction", &pipeline::analytic_pass_fraction);
  py::class_<pipeline::ProtocolConfig>(pm, "ProtocolConfig")
      .def_property_readonly("n_r_plus", &pipeline::ProtocolConfig::n_r_plus)
      .def_readwrite("workers", &pipeline::ProtocolConfig::workers)
      .def_readwrite("keep_raw_samples",
                     &pipeline::ProtocolConfig::keep_raw_samples);

  // --------------------------------------------------------------- stats --
  auto sm = m.def_submodule("stats");
  py::class_<stats::TestResult>(sm, "TestResult")
      .def_readonly("name", &stats::TestResult::name)
      .def_readonly("p_value", &stats::TestResult::p_value)
      .def_readonly("pass_", &stats::TestResult::pass);
  sm.def("run_battery", &stats::run_battery);
  sm.def("monobit_p", &stats::monobit_p);
  sm.def("block_frequency_p", &stats::block_frequency_p, py::arg("bits"),
         py::arg("block_len") = 128);
  sm.def("runs_p", &stats::runs_p);
}
