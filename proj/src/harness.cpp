#include "ivlreg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "ivlreg/discrete_sem.hpp"
#include "ivlreg/estimators.hpp"
#include "ivlreg/rng.hpp"
#include "ivlreg/svg_plot.hpp"

namespace ivlreg {

namespace {

// fixed stream tags hung off the trial seed
constexpr std::uint64_t kCoeffStream = 0xc0effull;
constexpr std::uint64_t kSampleStream = 0x5a3f1eull;
constexpr std::uint64_t kAugmentStream = 0xa46ull;
constexpr std::uint64_t kSelectStream = 0x5e1ec7ull;

std::uint64_t double_bits(double v) {
  if (std::isnan(v)) v = std::numeric_limits<double>::quiet_NaN();
  return std::bit_cast<std::uint64_t>(v);
}

void fill_normal(Eigen::Ref<Eigen::MatrixXd> m, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
}

Eigen::MatrixXd empirical_cov(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / double(x.rows());
}

// population feature covariance through the reduced form
Eigen::MatrixXd population_x_cov(const SemSpec& spec) {
  const int m = spec.m;
  Eigen::MatrixXd cov_u = Eigen::MatrixXd::Zero(m + 1, m + 1);
  const Eigen::MatrixXd sz = spec.exo_cov_z.size() > 0
                                 ? spec.exo_cov_z
                                 : Eigen::MatrixXd::Identity(spec.k, spec.k);
  const Eigen::MatrixXd sc = spec.exo_cov_c.size() > 0
                                 ? spec.exo_cov_c
                                 : Eigen::MatrixXd::Identity(spec.q, spec.q);
  Eigen::MatrixXd top = spec.sigma * spec.sigma * Eigen::MatrixXd::Identity(m, m);
  if (spec.k > 0) top += spec.gamma_mat * sz * spec.gamma_mat.transpose();
  if (spec.q > 0) top += spec.conf_x * sc * spec.conf_x.transpose();
  cov_u.topLeftCorner(m, m) = top;
  if (spec.q > 0) {
    const Eigen::VectorXd cross = spec.conf_x * (sc * (spec.kappa * spec.conf_y));
    cov_u.block(0, m, m, 1) = cross;
    cov_u.block(m, 0, 1, m) = cross.transpose();
    cov_u(m, m) = spec.kappa * spec.kappa * spec.conf_y.dot(sc * spec.conf_y);
  }
  cov_u(m, m) += spec.sigma * spec.sigma;
  const Eigen::MatrixXd r = reduced_form_matrix(spec);
  const Eigen::MatrixXd full = r * cov_u * r.transpose();
  return full.topLeftCorner(m, m);
}

SemSpec materialize_spec(const ExperimentConfig& cfg, double kappa, std::uint64_t seed) {
  SemSpec spec = cfg.sem;
  spec.kappa = kappa;
  if (cfg.redraw_sem) {
    Rng rng(seed_mix(seed, kCoeffStream));
    fill_normal(spec.f, rng);
    fill_normal(spec.conf_x, rng);
    fill_normal(spec.conf_y, rng);
  }
  return spec;
}

DaOperator build_da(const ExperimentConfig& cfg, const SemSpec& spec,
                    const Dataset& data, double gamma, std::uint64_t seed) {
  DaOperator da;
  switch (cfg.da.kind) {
    case DaDirective::Kind::nullspace:
      da = nullspace_basis(spec.f);
      break;
    case DaDirective::Kind::subset:
      da = subset_basis(nullspace_basis(spec.f), cfg.da.keep_prob,
                        seed_mix(seed, kAugmentStream + 1));
      break;
    case DaDirective::Kind::gaussian:
      da = gaussian_noise_da(empirical_cov(data.x), cfg.da.scale);
      break;
    case DaDirective::Kind::explicit_op:
      da = cfg.da.op;
      break;
  }
  da.strength = gamma * da.strength;
  return da;
}

std::mutex& stderr_mutex() {
  static std::mutex m;
  return m;
}

struct TrialOutput {
  std::vector<TrialRecord> records;
  std::vector<SelectionRow> selections;
};

TrialRecord base_record(const SweepPoint& pt, std::int64_t n, std::uint64_t seed,
                        const std::string& method) {
  TrialRecord r;
  r.kappa = pt.kappa;
  r.gamma = pt.gamma;
  r.alpha = pt.alpha;
  r.n = n;
  r.seed = seed;
  r.method = method;
  return r;
}

TrialOutput run_trial(const ExperimentConfig& cfg, const SweepPoint& pt, int trial) {
  const std::uint64_t seed = trial_seed(cfg.master_seed, pt, cfg.n, trial);
  TrialOutput out;

  const SemSpec spec = materialize_spec(cfg, pt.kappa, seed);
  const Dataset data = sample(spec, cfg.n, seed_mix(seed, kSampleStream));

  bool need_da = false;
  for (const auto& m : cfg.methods)
    if (m.kind != MethodSpec::Kind::erm) need_da = true;

  Dataset aug;
  if (need_da) {
    const DaOperator da = build_da(cfg, spec, data, pt.gamma, seed);
    aug = apply(da, data, seed_mix(seed, kAugmentStream));
  }

  EvalConfig eval;
  eval.truth_f = spec.f;
  eval.norm = cfg.norm;
  if (cfg.norm == CerNorm::weighted) eval.sigma_x = population_x_cov(spec);
  const Eigen::VectorXd h0 = Eigen::VectorXd::Zero(spec.m);

  for (const auto& method : cfg.methods) {
    TrialRecord rec = base_record(pt, cfg.n, seed, method.label());
    try {
      LinearEstimate est;
      switch (method.kind) {
        case MethodSpec::Kind::erm:
          est = fit_ols(data.x, data.y);
          break;
        case MethodSpec::Kind::da_erm:
          est = fit_ols(aug.x, aug.y);
          break;
        case MethodSpec::Kind::da_iv:
          est = fit_2sls(aug.x, aug.y, aug.z);
          break;
        case MethodSpec::Kind::da_ivl: {
          double alpha = method.alpha;
          if (method.strategy == MethodSpec::Strategy::fixed) {
            if (std::isnan(alpha)) alpha = pt.alpha;
            if (std::isnan(alpha))
              throw std::invalid_argument(
                  "DA_IVL without alpha needs an alpha sweep axis");
          } else {
            SelectionResult sel;
            const std::uint64_t sel_seed = seed_mix(seed, kSelectStream);
            if (method.strategy == MethodSpec::Strategy::cv)
              sel = select_alpha_cv(aug.x, aug.y, aug.z, cfg.selection_grid, 0.2, sel_seed);
            else if (method.strategy == MethodSpec::Strategy::lcv)
              sel = select_alpha_lcv(aug.x, aug.y, aug.z, cfg.selection_grid, 0.2, 2, sel_seed);
            else
              sel = select_alpha_cc(aug.x, aug.y, aug.z, cfg.selection_grid, spec.f.norm());
            alpha = sel.chosen_alpha;
            double best = std::numeric_limits<double>::quiet_NaN();
            for (size_t i = 0; i < sel.scores.size(); ++i)
              if (cfg.selection_grid.values[i] == alpha) best = sel.scores[i];
            out.selections.push_back({pt.kappa, pt.gamma, pt.alpha, cfg.n, seed,
                                      method.label(), sel.strategy, alpha, best});
          }
          est = fit_ivl(aug.x, aug.y, aug.z, alpha);
          break;
        }
      }
      rec.cer = cer(est.h, eval);
      rec.ncer = ncer(est.h, h0, eval);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(stderr_mutex());
      std::cerr << "trial failed: method=" << method.label() << " seed=" << seed
                << ": " << e.what() << "\n";
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  SweepPoint base;
  base.kappa = cfg.sem.kappa;
  base.gamma = cfg.gamma;
  if (cfg.sweep.axis.empty()) return {base};
  if (cfg.sweep.values.empty()) throw ConfigError("sweep.values must be non-empty");
  std::vector<SweepPoint> pts;
  for (double v : cfg.sweep.values) {
    SweepPoint p = base;
    if (cfg.sweep.axis == "kappa") {
      if (!(v >= 0.0)) throw ConfigError("kappa sweep values must be >= 0");
      p.kappa = v;
    } else if (cfg.sweep.axis == "gamma") {
      if (!(v >= 0.0)) throw ConfigError("gamma sweep values must be >= 0");
      p.gamma = v;
    } else if (cfg.sweep.axis == "alpha") {
      if (!(v > 0.0)) throw ConfigError("alpha sweep values must be > 0");
      p.alpha = v;
    } else {
      throw ConfigError("sweep.axis must be kappa, gamma or alpha");
    }
    pts.push_back(p);
  }
  return pts;
}

std::uint64_t trial_seed(std::uint64_t master, const SweepPoint& pt, std::int64_t n,
                         int trial) {
  return seed_mix(master, {double_bits(pt.kappa), double_bits(pt.gamma),
                           double_bits(pt.alpha), std::uint64_t(n), std::uint64_t(trial)});
}

SweepOutputs run_sweep(const ExperimentConfig& cfg) {
  const auto pts = sweep_points(cfg);
  if (cfg.methods.empty()) throw ConfigError("config has no methods");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.n < 1) throw ConfigError("n must be >= 1");
  const auto rep = validate_spec(materialize_spec(cfg, pts[0].kappa,
                                                  trial_seed(cfg.master_seed, pts[0], cfg.n, 0)));
  if (!rep.ok) {
    std::string what = "config sem spec invalid";
    for (const auto& e : rep.errors) what += "; " + e;
    throw ConfigError(what);
  }

  struct Task {
    size_t pt_idx;
    int trial;
  };
  std::vector<Task> tasks;
  for (size_t p = 0; p < pts.size(); ++p)
    for (int t = 0; t < cfg.trials; ++t) tasks.push_back({p, t});

  std::vector<TrialOutput> slots(tasks.size());
  std::atomic<size_t> next{0};
  const int workers = std::max(1, cfg.workers);
  auto work = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      slots[i] = run_trial(cfg, pts[tasks[i].pt_idx], tasks[i].trial);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  SweepOutputs out;
  for (const auto& slot : slots) {
    out.trials.insert(out.trials.end(), slot.records.begin(), slot.records.end());
    out.selections.insert(out.selections.end(), slot.selections.begin(),
                          slot.selections.end());
  }
  out.aggregates = aggregate(out.trials);
  return out;
}

const char* kSelectionCsvHeader =
    "kappa,gamma,alpha,n,seed,method,strategy,chosen_alpha,score";

namespace {
std::string sel_field(double v) { return std::isnan(v) ? std::string() : format_double(v); }
}  // namespace

void write_selection_csv(const std::string& path, const std::vector<SelectionRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << kSelectionCsvHeader << "\n";
  for (const auto& r : rows)
    out << sel_field(r.kappa) << "," << sel_field(r.gamma) << "," << sel_field(r.alpha)
        << "," << r.n << "," << r.seed << "," << r.method << "," << r.strategy << ","
        << sel_field(r.chosen_alpha) << "," << sel_field(r.score) << "\n";
}

std::vector<SelectionRow> read_selection_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::string line;
  std::getline(in, line);
  std::vector<SelectionRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        f.push_back(cur);
        cur.clear();
      } else if (ch != '\r') cur.push_back(ch);
    }
    f.push_back(cur);
    if (f.size() != 9) throw std::runtime_error("bad selection row in " + path);
    rows.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2]),
                    std::stoll(f[3]), std::stoull(f[4]), f[5], f[6], parse_double(f[7]),
                    parse_double(f[8])});
  }
  return rows;
}

void write_sweep_outputs(const SweepOutputs& out, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  write_trial_csv((dir / "results.csv").string(), out.trials);
  write_aggregate_csv((dir / "aggregate.csv").string(), out.aggregates);
  if (!out.selections.empty())
    write_selection_csv((dir / "selection.csv").string(), out.selections);
  save_experiment_config(cfg, (dir / "config_echo.json").string());
  if (cfg.plot && !cfg.sweep.axis.empty())
    emit_plot(out.aggregates, cfg.sweep.axis, (dir / "sweep.svg").string());
}

void run_single(const ExperimentConfig& cfg, std::ostream& os, SweepOutputs* keep) {
  ExperimentConfig single = cfg;
  single.sweep = {};
  const SweepPoint pt = sweep_points(single)[0];
  const std::uint64_t seed = trial_seed(single.master_seed, pt, single.n, 0);
  const SemSpec spec = materialize_spec(single, pt.kappa, seed);
  const Dataset data = sample(spec, single.n, seed_mix(seed, kSampleStream));
  const DaOperator da = build_da(single, spec, data, pt.gamma, seed);
  const Dataset aug = apply(da, data, seed_mix(seed, kAugmentStream));

  EvalConfig eval;
  eval.truth_f = spec.f;
  eval.norm = single.norm;
  if (single.norm == CerNorm::weighted) eval.sigma_x = population_x_cov(spec);
  const Eigen::VectorXd h0 = Eigen::VectorXd::Zero(spec.m);

  SweepOutputs out;
  os << "n=" << single.n << " m=" << spec.m << " kappa=" << pt.kappa
     << " gamma=" << pt.gamma << " seed=" << seed << "\n";
  for (const auto& m : single.methods) {
    TrialRecord rec = base_record(pt, single.n, seed, m.label());
    try {
      LinearEstimate est;
      const Eigen::MatrixXd* rx = &data.x;
      const Eigen::VectorXd* ry = &data.y;
      Eigen::MatrixXd rz;
      switch (m.kind) {
        case MethodSpec::Kind::erm:
          est = fit_ols(data.x, data.y);
          break;
        case MethodSpec::Kind::da_erm:
          est = fit_ols(aug.x, aug.y);
          rx = &aug.x;
          ry = &aug.y;
          rz = aug.z;
          break;
        case MethodSpec::Kind::da_iv:
          est = fit_2sls(aug.x, aug.y, aug.z);
          rx = &aug.x;
          ry = &aug.y;
          rz = aug.z;
          break;
        case MethodSpec::Kind::da_ivl: {
          double alpha = m.alpha;
          if (m.strategy == MethodSpec::Strategy::cv)
            alpha = select_alpha_cv(aug.x, aug.y, aug.z, single.selection_grid, 0.2,
                                    seed_mix(seed, kSelectStream))
                        .chosen_alpha;
          else if (m.strategy == MethodSpec::Strategy::lcv)
            alpha = select_alpha_lcv(aug.x, aug.y, aug.z, single.selection_grid, 0.2, 2,
                                     seed_mix(seed, kSelectStream))
                        .chosen_alpha;
          else if (m.strategy == MethodSpec::Strategy::cc)
            alpha = select_alpha_cc(aug.x, aug.y, aug.z, single.selection_grid,
                                    spec.f.norm())
                        .chosen_alpha;
          if (std::isnan(alpha))
            throw std::invalid_argument("DA_IVL needs an explicit alpha here");
          est = fit_ivl(aug.x, aug.y, aug.z, alpha);
          rx = &aug.x;
          ry = &aug.y;
          rz = aug.z;
          break;
        }
      }
      rec.cer = cer(est.h, eval);
      rec.ncer = ncer(est.h, h0, eval);
      const RiskReport risk = risk_report(est, *rx, *ry, rz);
      os << m.label() << ": ncer=" << rec.ncer << " cer=" << rec.cer
         << " erm_risk=" << risk.erm;
      if (rz.cols() > 0) os << " iv_risk=" << risk.iv << " gmm_risk=" << risk.gmm;
      if (std::isfinite(est.alpha)) os << " alpha=" << est.alpha;
      os << "\n";
    } catch (const std::exception& e) {
      os << m.label() << ": failed: " << e.what() << "\n";
    }
    out.trials.push_back(std::move(rec));
  }
  out.aggregates = aggregate(out.trials);
  if (keep) *keep = std::move(out);
}

IngestResult ingest_and_extract_truth(const IngestSpec& spec) {
  if (spec.degree < 0 || spec.degree > 5)
    throw std::invalid_argument("degree must be in 0..5 (0 = auto)");
  Dataset table = read_dataset_csv(spec.csv_path);
  if (table.c.cols() < 1)
    throw std::invalid_argument(
        "ingest needs an observed confounder block (c_* columns) to adjust on");
  const Eigen::Index n = table.rows();
  if (n < 10) throw std::invalid_argument("ingest needs at least 10 rows");

  IngestResult res;
  std::vector<int> candidates;
  if (spec.degree > 0) candidates = {spec.degree};
  else candidates = {1, 2, 3, 4, 5};

  int best_degree = candidates[0];
  if (candidates.size() > 1) {
    Rng rng(spec.seed);
    std::vector<Eigen::Index> idx(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[size_t(i)] = i;
    for (Eigen::Index i = n - 1; i > 0; --i)
      std::swap(idx[size_t(i)], idx[size_t(rng.below(std::uint64_t(i) + 1))]);
    Eigen::Index n_hold = Eigen::Index(std::llround(spec.holdout_frac * double(n)));
    n_hold = std::clamp<Eigen::Index>(n_hold, 1, n - 1);

    double best_mse = std::numeric_limits<double>::infinity();
    for (int d : candidates) {
      const Eigen::MatrixXd phi = poly_features(table.x, d);
      Eigen::MatrixXd design(n, phi.cols() + table.c.cols());
      design << phi, table.c;
      Eigen::MatrixXd train_x(n - n_hold, design.cols()), hold_x(n_hold, design.cols());
      Eigen::VectorXd train_y(n - n_hold), hold_y(n_hold);
      for (Eigen::Index i = 0; i < n_hold; ++i) {
        hold_x.row(i) = design.row(idx[size_t(i)]);
        hold_y(i) = table.y(idx[size_t(i)]);
      }
      for (Eigen::Index i = n_hold; i < n; ++i) {
        train_x.row(i - n_hold) = design.row(idx[size_t(i)]);
        train_y(i - n_hold) = table.y(idx[size_t(i)]);
      }
      const LinearEstimate est = fit_ols(train_x, train_y);
      const double mse = (hold_y - predict(est, hold_x)).squaredNorm() / double(n_hold);
      res.degree_mse.push_back(mse);
      if (mse < best_mse) {  // strict: ties stay with the lower degree
        best_mse = mse;
        best_degree = d;
      }
    }
  }

  const Eigen::MatrixXd phi = poly_features(table.x, best_degree);
  Eigen::MatrixXd design(n, phi.cols() + table.c.cols());
  design << phi, table.c;
  const LinearEstimate est = fit_ols(design, table.y);

  res.degree = best_degree;
  res.truth = est.h.head(phi.cols());
  res.data.x = phi;
  res.data.y = table.y;
  res.data.z.resize(n, 0);
  res.data.c = table.c;
  res.data.meta = table.meta;
  res.data.meta.note = "poly degree " + std::to_string(best_degree);
  return res;
}

DiscreteDemoReport demo_discrete(double e_train, double e_test, std::int64_t n,
                                 std::uint64_t seed) {
  DiscreteDemoReport rep;
  rep.e_train = e_train;
  rep.e_test = e_test;
  rep.n = n;

  constexpr int kContentBits = 10;
  const auto label = [](const std::vector<std::uint8_t>& x) {
    return parity_label(x, 1, 6);
  };
  const auto sampler = uniform_bits(kContentBits);

  const DiscreteDataset train =
      discrete_xor_sem_sample(label, sampler, e_train, n, seed_mix(seed, 1));
  const DiscreteDataset test =
      discrete_xor_sem_sample(label, sampler, e_test, n, seed_mix(seed, 2));
  rep.train_max_sweeps = train.max_sweeps;
  rep.test_max_sweeps = test.max_sweeps;

  auto pack = [](const std::vector<std::uint8_t>& x) {
    std::uint64_t key = 0;
    for (size_t i = 0; i < x.size(); ++i) key |= std::uint64_t(x[i] & 1) << i;
    return key;
  };

  // observational fit: per-pattern majority with global-majority fallback
  std::unordered_map<std::uint64_t, std::pair<std::int64_t, std::int64_t>> table;
  std::int64_t ones = 0;
  for (size_t i = 0; i < train.x.size(); ++i) {
    auto& cell = table[pack(train.x[i])];
    cell.first += train.y[i];
    cell.second += 1;
    ones += train.y[i];
  }
  const int global_majority = 2 * ones >= std::int64_t(train.y.size()) ? 1 : 0;
  auto obs_predict = [&](const std::vector<std::uint8_t>& x) {
    const auto it = table.find(pack(x));
    if (it == table.end()) return global_majority;
    const auto [sum, count] = it->second;
    if (2 * sum > count) return 1;
    if (2 * sum < count) return 0;
    return global_majority;
  };

  // interventional-mean fit: Monte-Carlo do(x) mean per distinct pattern,
  // rounded to the nearer outcome
  constexpr std::int64_t kMcDraws = 4000;
  std::unordered_map<std::uint64_t, int> ate_cache;
  auto ate_predict = [&](const std::vector<std::uint8_t>& x) {
    const std::uint64_t key = pack(x);
    const auto it = ate_cache.find(key);
    if (it != ate_cache.end()) return it->second;
    const auto draws = discrete_hard_do_y(label, x, kMcDraws, seed_mix(seed, {3, key}));
    std::int64_t sum = 0;
    for (auto d : draws) sum += d;
    const int pred = 2 * sum >= kMcDraws ? 1 : 0;
    ate_cache.emplace(key, pred);
    return pred;
  };

  std::int64_t obs_hits = 0, ate_hits = 0;
  for (size_t i = 0; i < test.x.size(); ++i) {
    obs_hits += obs_predict(test.x[i]) == int(test.y[i]) ? 1 : 0;
    ate_hits += ate_predict(test.x[i]) == int(test.y[i]) ? 1 : 0;
  }
  rep.obs_accuracy = double(obs_hits) / double(test.x.size());
  rep.ate_accuracy = double(ate_hits) / double(test.x.size());
  return rep;
}

}  // namespace ivlreg
