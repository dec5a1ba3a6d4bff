// Command line front end: Monte-Carlo sweeps of the CPM CSI-exchange
// simulator with CSV output.
//
//   cpmsim fig1 [--trials N] [--seed S] [--out PATH] [--threads T]
//   cpmsim fig2 [--trials N] [--seed S] [--out PATH] [--threads T]
//   cpmsim run --config scenario.json [--out PATH] [--trace PATH] ...

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cpmsim/config.hpp"
#include "cpmsim/experiment.hpp"

namespace {

struct CommonOpts {
  int trials = 0;  // 0 = subcommand default
  std::uint64_t seed = 1;
  std::string out;
  int threads = 0;
  bool discount = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, const std::string& default_out) {
  o.out = default_out;
  cmd->add_option("--trials", o.trials, "Monte-Carlo trials per sweep point");
  cmd->add_option("--seed", o.seed, "base RNG seed");
  cmd->add_option("--out", o.out, "output CSV path");
  cmd->add_option("--threads", o.threads,
                  "worker threads (0 = hardware concurrency)");
  cmd->add_flag("--discount-exploration", o.discount,
                "scale sum-rates by (frame - exploration slots)/frame");
}

void write_records(const std::vector<cpmsim::MetricsRecord>& records,
                   const std::string& path) {
  cpmsim::emit_csv(records, path);
  std::cout << "wrote " << path << " (" << records.size() << " records)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interference-network CSI exchange simulator"};
  app.require_subcommand(1);

  CommonOpts fig1_opts, fig2_opts, run_opts;
  std::string config_path, trace_path;

  CLI::App* fig1 = app.add_subcommand(
      "fig1", "sum-rate vs SNR: perfect/CPM/IWFA power control, K=4, S=2");
  add_common(fig1, fig1_opts, "fig1.csv");

  CLI::App* fig2 = app.add_subcommand(
      "fig2", "CPM estimation SNR vs SIR for three feedback settings, K=2");
  add_common(fig2, fig2_opts, "fig2.csv");

  CLI::App* run = app.add_subcommand("run", "run a scenario from a JSON config");
  add_common(run, run_opts, "out.csv");
  run->add_option("--config", config_path, "scenario JSON file")->required();
  run->add_option("--trace", trace_path,
                  "write per-slot exchange trace (JSON lines; single-threaded)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fig1->parsed()) {
      int trials = fig1_opts.trials > 0 ? fig1_opts.trials : 500;
      cpmsim::Scenario sc = cpmsim::fig1_scenario(trials, fig1_opts.seed);
      sc.discount_exploration = fig1_opts.discount;
      write_records(cpmsim::run_scenario(sc, fig1_opts.threads), fig1_opts.out);
    } else if (fig2->parsed()) {
      int trials = fig2_opts.trials > 0 ? fig2_opts.trials : 10000;
      std::vector<cpmsim::MetricsRecord> all;
      for (cpmsim::Scenario& sc : cpmsim::fig2_scenarios(trials, fig2_opts.seed)) {
        sc.discount_exploration = fig2_opts.discount;
        auto records = cpmsim::run_scenario(sc, fig2_opts.threads);
        all.insert(all.end(), records.begin(), records.end());
      }
      write_records(all, fig2_opts.out);
    } else if (run->parsed()) {
      cpmsim::Scenario sc = cpmsim::load_scenario_file(config_path);
      if (run_opts.trials > 0) sc.trials = run_opts.trials;
      if (run->count("--seed")) sc.seed = run_opts.seed;
      if (run_opts.discount) sc.discount_exploration = true;
      std::vector<cpmsim::MetricsRecord> records;
      if (!trace_path.empty()) {
        std::ofstream trace(trace_path);
        if (!trace) throw std::runtime_error("cannot open trace: " + trace_path);
        records = cpmsim::run_scenario_traced(sc, trace);
      } else {
        records = cpmsim::run_scenario(sc, run_opts.threads);
      }
      write_records(records, run_opts.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
