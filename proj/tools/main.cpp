// command line front end: validate / run / sweep / ingest / demo-discrete / plot
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ivlreg/harness.hpp"
#include "ivlreg/svg_plot.hpp"

namespace {

using namespace ivlreg;

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw ConfigError("bad sweep value: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--values is empty");
  return out;
}

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int workers = 0;
  std::int64_t n = 0;
  int trials = 0;
  std::string axis;
  std::string values;
  bool no_plot = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_sweep) {
  cmd->add_option("--config", o.config_path, "experiment config json");
  cmd->add_option("--seed", o.seed, "master seed")->each([&](const std::string&) {
    o.seed_set = true;
  });
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_option("--n", o.n, "samples per trial");
  cmd->add_option("--trials", o.trials, "trials per sweep point");
  if (with_sweep) {
    cmd->add_option("--axis", o.axis, "sweep axis: kappa, gamma or alpha");
    cmd->add_option("--values", o.values, "comma separated sweep values");
    cmd->add_flag("--no-plot", o.no_plot, "skip the svg plot");
  }
}

ExperimentConfig make_config(const CommonOpts& o) {
  ExperimentConfig cfg = o.config_path.empty() ? default_protocol()
                                               : load_experiment_config(o.config_path);
  if (o.seed_set) cfg.master_seed = o.seed;
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.workers > 0) cfg.workers = o.workers;
  if (o.n > 0) cfg.n = o.n;
  if (o.trials > 0) cfg.trials = o.trials;
  if (!o.axis.empty()) cfg.sweep.axis = o.axis;
  if (!o.values.empty()) cfg.sweep.values = parse_values(o.values);
  if (o.no_plot) cfg.plot = false;
  return cfg;
}

int cmd_validate(const CommonOpts& o) {
  const ExperimentConfig cfg = make_config(o);
  if (cfg.methods.empty()) throw ConfigError("config has no methods");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.n < 1) throw ConfigError("n must be >= 1");
  sweep_points(cfg);  // checks axis name and value ranges
  const ValidationReport rep = validate_spec(cfg.sem);
  std::cout << "sem: m=" << cfg.sem.m << " k=" << cfg.sem.k << " q=" << cfg.sem.q
            << " kappa=" << cfg.sem.kappa << " sigma=" << cfg.sem.sigma << "\n";
  std::cout << "loop gain: " << rep.loop_gain << (rep.stable ? " (stable)" : " (unstable)")
            << "\n";
  std::cout << "methods:";
  for (const auto& m : cfg.methods) std::cout << " " << m.label();
  std::cout << "\n";
  if (!cfg.sweep.axis.empty())
    std::cout << "sweep: " << cfg.sweep.axis << " over " << cfg.sweep.values.size()
              << " values, " << cfg.trials << " trials each\n";
  if (!rep.ok) {
    std::string what = "sem spec invalid";
    for (const auto& e : rep.errors) what += "; " + e;
    throw ConfigError(what);
  }
  std::cout << "config ok\n";
  return 0;
}

int cmd_run(const CommonOpts& o) {
  ExperimentConfig cfg = make_config(o);
  cfg.sweep = SweepSpec{};  // run is always a single point
  SweepOutputs out;
  run_single(cfg, std::cout, &out);
  if (!o.out_dir.empty()) {
    cfg.plot = false;
    write_sweep_outputs(out, cfg);
    std::cout << "wrote " << cfg.out_dir << "/results.csv\n";
  }
  return 0;
}

int cmd_sweep(const CommonOpts& o) {
  const ExperimentConfig cfg = make_config(o);
  const SweepOutputs out = run_sweep(cfg);
  write_sweep_outputs(out, cfg);
  std::cout << "wrote " << cfg.out_dir << "/results.csv (" << out.trials.size()
            << " rows), aggregate.csv (" << out.aggregates.size() << " groups)\n";
  if (cfg.plot && !cfg.sweep.axis.empty())
    std::cout << "wrote " << cfg.out_dir << "/sweep.svg\n";
  return 0;
}

int cmd_ingest(const IngestSpec& spec, const std::string& out_dir) {
  const IngestResult res = ingest_and_extract_truth(spec);
  std::cout << "rows: " << res.data.rows() << ", design width: " << res.data.x.cols()
            << ", degree: " << res.degree << "\n";
  if (!res.degree_mse.empty()) {
    std::cout << "holdout mse by degree:";
    for (size_t i = 0; i < res.degree_mse.size(); ++i)
      std::cout << " d" << (i + 1) << "=" << res.degree_mse[i];
    std::cout << "\n";
  }
  std::cout << "truth coefficients:";
  for (Eigen::Index i = 0; i < res.truth.size(); ++i) std::cout << " " << res.truth[i];
  std::cout << "\n";
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_dataset_csv(res.data, out_dir + "/extracted.csv");
    std::ofstream tf(out_dir + "/truth.csv");
    tf << "coefficient\n";
    for (Eigen::Index i = 0; i < res.truth.size(); ++i)
      tf << format_double(res.truth[i]) << "\n";
    std::cout << "wrote " << out_dir << "/extracted.csv and truth.csv\n";
  }
  return 0;
}

int cmd_demo_discrete(double e_train, double e_test, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (e_train < 0 || e_train > 1 || e_test < 0 || e_test > 1)
    throw ConfigError("e_train and e_test must be in [0, 1]");
  const DiscreteDemoReport rep = demo_discrete(e_train, e_test, n, seed);
  std::cout << "train colour noise " << rep.e_train << ", test colour noise " << rep.e_test
            << ", n=" << rep.n << "\n";
  std::cout << "observational predictor accuracy: " << rep.obs_accuracy << "\n";
  std::cout << "intervention-mean predictor accuracy: " << rep.ate_accuracy << "\n";
  std::cout << "max sweeps to equilibrium: train " << rep.train_max_sweeps << ", test "
            << rep.test_max_sweeps << "\n";
  return 0;
}

int cmd_plot(const std::string& csv, const std::string& axis, const std::string& out,
             const std::string& title) {
  emit_plot_from_csv(csv, axis, out, title);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal effect estimation from augmented data"};
  app.require_subcommand(1);

  CommonOpts validate_opts, run_opts, sweep_opts;
  add_common(app.add_subcommand("validate", "check a config and its sem spec"),
             validate_opts, true);
  add_common(app.add_subcommand("run", "one trial at the config coordinate"), run_opts,
             false);
  add_common(app.add_subcommand("sweep", "full sweep with per-trial and aggregate csv"),
             sweep_opts, true);

  IngestSpec ingest_spec;
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest", "extract ground truth from an observed csv");
  ingest->add_option("--csv", ingest_spec.csv_path, "input dataset csv")->required();
  ingest->add_option("--degree", ingest_spec.degree,
                     "polynomial degree 1..5, 0 = pick by holdout mse");
  ingest->add_option("--holdout-frac", ingest_spec.holdout_frac,
                     "holdout fraction for degree selection");
  ingest->add_option("--seed", ingest_spec.seed, "holdout split seed");
  ingest->add_option("--out", ingest_out, "output directory");

  double e_train = 0.1, e_test = 0.9;
  std::int64_t demo_n = 100000;
  std::uint64_t demo_seed = 1;
  auto* demo = app.add_subcommand("demo-discrete",
                                  "discrete xor sem: observational vs intervention predictor");
  demo->add_option("--e-train", e_train, "train colour flip probability");
  demo->add_option("--e-test", e_test, "test colour flip probability");
  demo->add_option("--n", demo_n, "rows per draw");
  demo->add_option("--seed", demo_seed, "seed");

  std::string plot_csv, plot_axis, plot_out = "sweep.svg", plot_title;
  auto* plot = app.add_subcommand("plot", "render an aggregate csv as an svg");
  plot->add_option("--csv", plot_csv, "aggregate csv")->required();
  plot->add_option("--axis", plot_axis, "x axis: kappa, gamma or alpha")->required();
  plot->add_option("--out", plot_out, "output svg path");
  plot->add_option("--title", plot_title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("validate")) return cmd_validate(validate_opts);
    if (app.got_subcommand("run")) return cmd_run(run_opts);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_opts);
    if (app.got_subcommand("ingest")) return cmd_ingest(ingest_spec, ingest_out);
    if (app.got_subcommand("demo-discrete"))
      return cmd_demo_discrete(e_train, e_test, demo_n, demo_seed);
    if (app.got_subcommand("plot")) return cmd_plot(plot_csv, plot_axis, plot_out, plot_title);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
