// Python bindings for the simulator core.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cpmsim/config.hpp"
#include "cpmsim/cpm_exchange.hpp"
#include "cpmsim/experiment.hpp"
#include "cpmsim/power_control.hpp"

namespace py = pybind11;
using namespace cpmsim;

namespace {

py::array_t<double> channel_to_numpy(const ChannelMatrix& m) {
  py::array_t<double> out({m.tx_count, m.tx_count, m.band_count});
  auto view = out.mutable_unchecked<3>();
  for (int tx = 0; tx < m.tx_count; ++tx)
    for (int rx = 0; rx < m.tx_count; ++rx)
      for (int s = 0; s < m.band_count; ++s) view(tx, rx, s) = m.gain(tx, rx, s);
  return out;
}

py::array_t<double> local_to_numpy(const LocalCsi& c) {
  py::array_t<double> out({c.tx_count, c.band_count});
  auto view = out.mutable_unchecked<2>();
  for (int tx = 0; tx < c.tx_count; ++tx)
    for (int s = 0; s < c.band_count; ++s) view(tx, s) = c.gain(tx, s);
  return out;
}

py::array_t<double> profile_to_numpy(const PowerProfile& p) {
  py::array_t<double> out({p.tx_count, p.band_count});
  auto view = out.mutable_unchecked<2>();
  for (int tx = 0; tx < p.tx_count; ++tx)
    for (int s = 0; s < p.band_count; ++s) view(tx, s) = p.power(tx, s);
  return out;
}

}  // namespace

PYBIND11_MODULE(_cpmsim, m) {
  m.doc() =
      "Interference-network simulator: local CSI exchange via continuous "
      "power modulation with quantized RSSI feedback, and sum-rate power "
      "control.";

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", &Rng::uniform);

  py::class_<NetworkConfig>(m, "NetworkConfig")
      .def(py::init<>())
      .def_static("make", &NetworkConfig::make, py::arg("tx_count"),
                  py::arg("band_count"), py::arg("snr_db"), py::arg("sir_db"),
                  py::arg("n_bits"), py::arg("epsilon"),
                  py::arg("sigma2") = 1.0)
      .def_readwrite("tx_count", &NetworkConfig::tx_count)
      .def_readwrite("band_count", &NetworkConfig::band_count)
      .def_readwrite("p_max", &NetworkConfig::p_max)
      .def_readwrite("sigma2", &NetworkConfig::sigma2)
      .def_readwrite("snr_db", &NetworkConfig::snr_db)
      .def_readwrite("sir_db", &NetworkConfig::sir_db)
      .def_readwrite("n_bits", &NetworkConfig::n_bits)
      .def_readwrite("epsilon", &NetworkConfig::epsilon)
      .def_readwrite("gain_min_factor", &NetworkConfig::gain_min_factor)
      .def_readwrite("gain_max_factor", &NetworkConfig::gain_max_factor)
      .def_readwrite("local_csi_noise_std",
                     &NetworkConfig::local_csi_noise_std)
      .def("validate", &NetworkConfig::validate);

  py::class_<GainBounds>(m, "GainBounds")
      .def(py::init<double, double>(), py::arg("min_gain"),
           py::arg("max_gain"))
      .def_readwrite("min_gain", &GainBounds::min_gain)
      .def_readwrite("max_gain", &GainBounds::max_gain);

  py::class_<ChannelMatrix>(m, "ChannelMatrix")
      .def(py::init<int, int>(), py::arg("tx_count"), py::arg("band_count"))
      .def_readonly("tx_count", &ChannelMatrix::tx_count)
      .def_readonly("band_count", &ChannelMatrix::band_count)
      .def("gain",
           [](const ChannelMatrix& m, int tx, int rx, int band) {
             return m.gain(tx, rx, band);
           })
      .def("set_gain",
           [](ChannelMatrix& m, int tx, int rx, int band, double value) {
             m.gain(tx, rx, band) = value;
           })
      .def("bound",
           [](const ChannelMatrix& m, int tx, int rx) { return m.bound(tx, rx); })
      .def("set_bound",
           [](ChannelMatrix& m, int tx, int rx, double lo, double hi) {
             m.bound(tx, rx) = GainBounds{lo, hi};
           })
      .def("frob_sq", &ChannelMatrix::frob_sq)
      .def("to_numpy", &channel_to_numpy);

  py::class_<LocalCsi>(m, "LocalCsi")
      .def_readonly("owner", &LocalCsi::owner)
      .def("gain",
           [](const LocalCsi& c, int tx, int band) { return c.gain(tx, band); })
      .def("to_numpy", &local_to_numpy);

  m.def("mean_gain", &mean_gain, py::arg("tx"), py::arg("rx"),
        py::arg("sir_db"));
  m.def("gain_bounds", &gain_bounds, py::arg("mean"),
        py::arg("min_factor") = 0.01, py::arg("max_factor") = 5.0);
  m.def("sample_channel", &sample_channel, py::arg("config"), py::arg("rng"));
  m.def("perturb_local_csi", &perturb_local_csi, py::arg("truth"),
        py::arg("config"), py::arg("rng"));

  py::class_<Quantizer>(m, "Quantizer")
      .def_static("for_snr", &Quantizer::for_snr, py::arg("snr_db"),
                  py::arg("n_bits"))
      .def_readonly("n_bits", &Quantizer::n_bits)
      .def_readonly("lo_db", &Quantizer::lo_db)
      .def_readonly("hi_db", &Quantizer::hi_db)
      .def("level_count", &Quantizer::level_count)
      .def("cell_width_db", &Quantizer::cell_width_db)
      .def("levels_db", &Quantizer::levels_db)
      .def("quantize", &Quantizer::quantize, py::arg("power"))
      .def("dequantize", &Quantizer::dequantize, py::arg("label"));

  py::class_<FeedbackObservation>(m, "FeedbackObservation")
      .def_readonly("true_power", &FeedbackObservation::true_power)
      .def_readonly("label_sent", &FeedbackObservation::label_sent)
      .def_readonly("label_received", &FeedbackObservation::label_received)
      .def_readonly("observed_power", &FeedbackObservation::observed_power)
      .def_readonly("noise_total", &FeedbackObservation::noise_total)
      .def_readonly("reference_gain", &FeedbackObservation::reference_gain);

  m.def(
      "rs_power",
      [](const std::vector<double>& gains, const std::vector<double>& powers,
         double sigma2) { return rs_power(gains, powers, sigma2); },
      py::arg("gains_to_rx"), py::arg("powers"), py::arg("sigma2"));
  m.def("corrupt_label", &corrupt_label, py::arg("label"), py::arg("n_bits"),
        py::arg("epsilon"), py::arg("rng"));
  m.def(
      "observe",
      [](const Quantizer& q, const std::vector<double>& gains,
         const std::vector<double>& powers, double sigma2, double epsilon,
         Rng& rng, double reference_gain) {
        return observe(q, gains, powers, sigma2, epsilon, rng, reference_gain);
      },
      py::arg("quantizer"), py::arg("gains_to_rx"), py::arg("powers"),
      py::arg("sigma2"), py::arg("epsilon"), py::arg("rng"),
      py::arg("reference_gain") = 1.0);

  py::class_<ExplorationSchedule>(m, "ExplorationSchedule")
      .def_readonly("tx_count", &ExplorationSchedule::tx_count)
      .def_readonly("slot_count", &ExplorationSchedule::slot_count)
      .def("active_tx", &ExplorationSchedule::active_tx, py::arg("slot"))
      .def("block_start", &ExplorationSchedule::block_start, py::arg("tx"));
  m.def("build_schedule", &build_schedule, py::arg("tx_count"));

  py::class_<CsiEstimate>(m, "CsiEstimate")
      .def_readonly("owner", &CsiEstimate::owner)
      .def_readonly("values", &CsiEstimate::values);

  m.def(
      "run_exchange",
      [](const ChannelMatrix& truth, const std::vector<LocalCsi>& local,
         const NetworkConfig& config, Rng& rng, bool exact_feedback,
         const std::vector<Eigen::MatrixXd>& coeffs) {
        ExchangeOptions opts;
        opts.exact_feedback = exact_feedback;
        opts.coeff_overrides = coeffs;
        return run_exchange(truth, local, config, rng, opts);
      },
      py::arg("truth"), py::arg("local"), py::arg("config"), py::arg("rng"),
      py::arg("exact_feedback") = false,
      py::arg("coeffs") = std::vector<Eigen::MatrixXd>{});

  py::class_<PowerProfile>(m, "PowerProfile")
      .def(py::init<int, int>(), py::arg("tx_count"), py::arg("band_count"))
      .def_readonly("tx_count", &PowerProfile::tx_count)
      .def_readonly("band_count", &PowerProfile::band_count)
      .def("power",
           [](const PowerProfile& p, int tx, int band) {
             return p.power(tx, band);
           })
      .def("set_power",
           [](PowerProfile& p, int tx, int band, double value) {
             p.power(tx, band) = value;
           })
      .def("total_power", &PowerProfile::total_power, py::arg("tx"))
      .def("budget_ok", &PowerProfile::budget_ok, py::arg("p_max"),
           py::arg("tol") = 1e-9)
      .def("to_numpy", &profile_to_numpy);

  py::class_<BrdSettings>(m, "BrdSettings")
      .def(py::init<>())
      .def_readwrite("grid_points", &BrdSettings::grid_points)
      .def_readwrite("max_rounds", &BrdSettings::max_rounds)
      .def_readwrite("convergence_tol", &BrdSettings::convergence_tol);

  m.def("sinr", &sinr, py::arg("tx"), py::arg("band"), py::arg("profile"),
        py::arg("gains"), py::arg("sigma2"));
  m.def("sum_rate", &sum_rate, py::arg("profile"), py::arg("gains"),
        py::arg("sigma2"));

  py::class_<WaterFillResult>(m, "WaterFillResult")
      .def_readonly("powers", &WaterFillResult::powers)
      .def_readonly("water_level", &WaterFillResult::water_level)
      .def_readonly("degenerate", &WaterFillResult::degenerate);
  m.def(
      "water_fill",
      [](const std::vector<double>& g, const std::vector<double>& n,
         double budget) { return water_fill(g, n, budget); },
      py::arg("direct_gains"), py::arg("interference_plus_noise"),
      py::arg("budget"));

  py::class_<BrdResult>(m, "BrdResult")
      .def_readonly("profile", &BrdResult::profile)
      .def_readonly("converged", &BrdResult::converged)
      .def_readonly("rounds", &BrdResult::rounds)
      .def_readonly("objective_trace", &BrdResult::objective_trace);
  m.def(
      "team_brd",
      [](const ChannelMatrix& gains, const NetworkConfig& config,
         const BrdSettings& settings) { return team_brd(gains, config, settings); },
      py::arg("gains"), py::arg("config"), py::arg("settings") = BrdSettings{});
  m.def(
      "distributed_team_brd",
      [](const std::vector<CsiEstimate>& estimates, const NetworkConfig& config,
         const BrdSettings& settings) {
        return distributed_team_brd(estimates, config, settings);
      },
      py::arg("estimates"), py::arg("config"),
      py::arg("settings") = BrdSettings{});

  py::class_<IwfaResult>(m, "IwfaResult")
      .def_readonly("profile", &IwfaResult::profile)
      .def_readonly("converged", &IwfaResult::converged)
      .def_readonly("rounds", &IwfaResult::rounds);
  m.def(
      "iwfa",
      [](const ChannelMatrix& truth, const NetworkConfig& config,
         const BrdSettings& settings) { return iwfa(truth, config, settings); },
      py::arg("truth"), py::arg("config"), py::arg("settings") = BrdSettings{});

  m.def("esnr", &esnr, py::arg("truth"), py::arg("estimate"));
  m.def("error_frob_sq", &error_frob_sq, py::arg("truth"),
        py::arg("estimate"));

  py::enum_<Scheme>(m, "Scheme")
      .value("cpm_brd", Scheme::cpm_brd)
      .value("perfect_brd", Scheme::perfect_brd)
      .value("iwfa", Scheme::iwfa);
  m.def("scheme_name", &scheme_name);
  m.def("scheme_from_name", &scheme_from_name);

  py::class_<SweepSpec>(m, "SweepSpec")
      .def(py::init<>())
      .def(py::init([](const std::string& name, const std::vector<double>& v) {
             return SweepSpec{name, v};
           }),
           py::arg("name"), py::arg("values"))
      .def_readwrite("name", &SweepSpec::name)
      .def_readwrite("values", &SweepSpec::values);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("network", &Scenario::network)
      .def_readwrite("sweep", &Scenario::sweep)
      .def_readwrite("schemes", &Scenario::schemes)
      .def_readwrite("trials", &Scenario::trials)
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("frame_length", &Scenario::frame_length)
      .def_readwrite("discount_exploration", &Scenario::discount_exploration)
      .def_readwrite("brd", &Scenario::brd)
      .def_readwrite("scheme_label_suffix", &Scenario::scheme_label_suffix)
      .def("validate", &Scenario::validate);

  py::class_<MetricsRecord>(m, "MetricsRecord")
      .def_readonly("sweep_value", &MetricsRecord::sweep_value)
      .def_readonly("scheme", &MetricsRecord::scheme)
      .def_readonly("esnr_db", &MetricsRecord::esnr_db)
      .def_readonly("se_esnr_db", &MetricsRecord::se_esnr_db)
      .def_readonly("mean_sum_rate", &MetricsRecord::mean_sum_rate)
      .def_readonly("se_rate", &MetricsRecord::se_rate)
      .def_readonly("trial_count", &MetricsRecord::trial_count);

  m.def(
      "run_scenario",
      [](const Scenario& sc, int threads) { return run_scenario(sc, threads); },
      py::arg("scenario"), py::arg("threads") = 0);
  m.def("to_csv", &to_csv, py::arg("records"));
  m.def("emit_csv", &emit_csv, py::arg("records"), py::arg("path"));
  m.def("load_scenario", &load_scenario, py::arg("json_text"));
  m.def("load_scenario_file", &load_scenario_file, py::arg("path"));
  m.def("fig1_scenario", &fig1_scenario, py::arg("trials") = 500,
        py::arg("seed") = 1);
  m.def("fig2_scenarios", &fig2_scenarios, py::arg("trials") = 10000,
        py::arg("seed") = 1);
}
