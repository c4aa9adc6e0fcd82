// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ivlreg/augmentation.hpp"
#include "ivlreg/discrete_sem.hpp"
#include "ivlreg/estimators.hpp"
#include "ivlreg/harness.hpp"
#include "ivlreg/rng.hpp"
#include "ivlreg/sem.hpp"

using namespace ivlreg;

namespace {

int g_failures = 0;

void verdict(int criterion, bool ok, const std::string& text) {
  (void)criterion;
  std::printf("%s %s\n", ok ? "[PASS]" : "[FAIL]", text.c_str());
  if (!ok) ++g_failures;
}

int pick_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) return 1;
  return int(hw > 8 ? 8 : hw);
}

struct Stats {
  double mean = 0.0;
  double se = 0.0;
};

Stats mean_se(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= double(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(acc / double(v.size() - 1)) / std::sqrt(double(v.size()));
  }
  return s;
}

const AggregateRecord* find_agg(const std::vector<AggregateRecord>& aggs,
                                const std::string& method, double kappa, double gamma,
                                double alpha) {
  for (const auto& a : aggs) {
    if (a.method != method) continue;
    const bool k_ok = std::isnan(kappa) ? std::isnan(a.kappa) : a.kappa == kappa;
    const bool g_ok = std::isnan(gamma) ? std::isnan(a.gamma) : a.gamma == gamma;
    const bool a_ok = std::isnan(alpha) ? std::isnan(a.alpha) : a.alpha == alpha;
    if (k_ok && g_ok && a_ok) return &a;
  }
  return nullptr;
}

bool ci_overlap(const AggregateRecord& a, const AggregateRecord& b) {
  return a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const double kNan = std::numeric_limits<double>::quiet_NaN();

ExperimentConfig fig4a_config() {
  ExperimentConfig cfg = default_protocol();
  cfg.sweep.axis = "kappa";
  cfg.sweep.values = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  cfg.trials = 25;
  cfg.n = 2048;
  cfg.master_seed = 1;
  return cfg;
}

// ---- criterion 1: kappa sweep ordering ----------------------------------

void criterion_1() {
  ExperimentConfig cfg = fig4a_config();
  cfg.workers = pick_workers();
  cfg.plot = false;
  const auto t0 = std::chrono::steady_clock::now();
  const SweepOutputs out = run_sweep(cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bool ok = true;
  std::ostringstream note;
  std::vector<double> erm_means, erm_ses;
  for (double k : cfg.sweep.values) {
    const AggregateRecord* a = find_agg(out.aggregates, "ERM", k, 1.0, kNan);
    if (!a || a->trials < 25) {
      ok = false;
      break;
    }
    erm_means.push_back(a->mean_ncer);
    erm_ses.push_back(a->stderr_ncer);
  }
  if (erm_means.size() == cfg.sweep.values.size()) {
    for (size_t i = 0; i + 1 < erm_means.size(); ++i) {
      if (erm_means[i + 1] < erm_means[i] - (erm_ses[i] + erm_ses[i + 1])) ok = false;
    }
    if (!(erm_means.back() > erm_means.front())) ok = false;
  } else {
    ok = false;
  }

  const AggregateRecord* erm = find_agg(out.aggregates, "ERM", 1.0, 1.0, kNan);
  const AggregateRecord* da = find_agg(out.aggregates, "DA_ERM", 1.0, 1.0, kNan);
  const AggregateRecord* ivl = find_agg(out.aggregates, "DA_IVL(cc)", 1.0, 1.0, kNan);
  if (erm && da && ivl) {
    const double gap1 = erm->mean_ncer - da->mean_ncer;
    const double gap2 = da->mean_ncer - ivl->mean_ncer;
    if (!(gap1 > std::max(erm->stderr_ncer, da->stderr_ncer))) ok = false;
    if (!(gap2 > std::max(da->stderr_ncer, ivl->stderr_ncer))) ok = false;
    note << "at kappa=1 ERM=" << erm->mean_ncer << " DA_ERM=" << da->mean_ncer
         << " DA_IVL(cc)=" << ivl->mean_ncer;
  } else {
    ok = false;
  }
  if (secs >= 300.0) ok = false;
  note << ", " << secs << "s";
  verdict(1, ok,
          "criterion 1: kappa sweep keeps ERM rising and orders the methods at "
          "kappa=1 (" +
              note.str() + ")");
}

// ---- criterion 2: interior alpha optimum and selected alphas -------------

void criterion_2() {
  ExperimentConfig cfg = default_protocol();
  cfg.workers = pick_workers();
  cfg.plot = false;
  cfg.sweep.axis = "alpha";
  cfg.sweep.values = AlphaGrid::log_space(1e-5, 1e5, 32).values;
  cfg.methods = {MethodSpec::parse("DA_IVL")};
  const SweepOutputs sweep = run_sweep(cfg);

  bool ok = true;
  std::vector<std::pair<double, double>> curve;  // alpha, mean
  for (double a : cfg.sweep.values) {
    const AggregateRecord* rec = find_agg(sweep.aggregates, "DA_IVL", 1.0, 1.0, a);
    if (!rec) {
      ok = false;
      continue;
    }
    curve.push_back({a, rec->mean_ncer});
  }
  size_t best = 0;
  for (size_t i = 1; i < curve.size(); ++i)
    if (curve[i].second < curve[best].second) best = i;
  const bool interior = best > 0 && best + 1 < curve.size();
  if (!interior) ok = false;

  // the min over 32 noisy means is biased low by selection, so re-measure the
  // curve at the argmin alpha with independent trials for the 1.5x reference
  ExperimentConfig ref = default_protocol();
  ref.workers = pick_workers();
  ref.plot = false;
  ref.master_seed = 2;
  MethodSpec at_best;
  at_best.kind = MethodSpec::Kind::da_ivl;
  at_best.alpha = curve.empty() ? 1.0 : curve[best].first;
  ref.methods = {at_best};
  const SweepOutputs refit = run_sweep(ref);
  const double ref_min =
      refit.aggregates.size() == 1 ? refit.aggregates[0].mean_ncer : kNan;
  if (!(ref_min > 0.0)) ok = false;

  ExperimentConfig sel = default_protocol();
  sel.workers = pick_workers();
  sel.plot = false;
  sel.methods = {MethodSpec::parse("DA_IVL(cv)"), MethodSpec::parse("DA_IVL(cc)")};
  const SweepOutputs picked = run_sweep(sel);
  const AggregateRecord* cv = find_agg(picked.aggregates, "DA_IVL(cv)", 1.0, 1.0, kNan);
  const AggregateRecord* cc = find_agg(picked.aggregates, "DA_IVL(cc)", 1.0, 1.0, kNan);
  if (!cv || !cc) {
    ok = false;
  } else {
    if (!(cv->mean_ncer <= 1.5 * ref_min)) ok = false;
    if (!(cc->mean_ncer <= 1.5 * ref_min)) ok = false;
  }
  std::ostringstream note;
  note << "argmin index " << best << "/31, curve min at argmin " << ref_min;
  if (cv && cc) note << ", cv " << cv->mean_ncer << ", cc " << cc->mean_ncer;
  verdict(2, ok,
          "criterion 2: alpha curve bottoms out strictly inside the grid and "
          "selected alphas stay within 1.5x of the minimum (" +
              note.str() + ")");
}

// ---- criterion 3: gamma sweep diminishing returns ------------------------

void criterion_3() {
  ExperimentConfig cfg = default_protocol();
  cfg.workers = pick_workers();
  cfg.plot = false;
  cfg.sweep.axis = "gamma";
  cfg.sweep.values.clear();
  for (int i = 0; i < 15; ++i) cfg.sweep.values.push_back(std::pow(10.0, -2.5 + 0.25 * i));
  cfg.methods = {MethodSpec::parse("DA_ERM"), MethodSpec::parse("DA_IVL(cc)")};
  const SweepOutputs out = run_sweep(cfg);

  bool ok = true;
  std::vector<const AggregateRecord*> da, ivl;
  for (double g : cfg.sweep.values) {
    da.push_back(find_agg(out.aggregates, "DA_ERM", 1.0, g, kNan));
    ivl.push_back(find_agg(out.aggregates, "DA_IVL(cc)", 1.0, g, kNan));
    if (!da.back() || !ivl.back()) ok = false;
  }
  std::ostringstream note;
  if (ok) {
    // overall decrease, strongly
    const double drop = da.front()->mean_ncer - da.back()->mean_ncer;
    if (!(drop > da.front()->stderr_ncer + da.back()->stderr_ncer)) ok = false;
    // never a significant increase on the way down
    for (size_t i = 0; i + 1 < da.size(); ++i) {
      if (da[i + 1]->mean_ncer >
          da[i]->mean_ncer + (da[i]->stderr_ncer + da[i + 1]->stderr_ncer))
        ok = false;
    }
    // plateau: on the scale of the whole drop the tail is flat, the last three
    // points sit inside a band that is a small fraction of the total range
    double lo = da.front()->mean_ncer, hi = da.front()->mean_ncer;
    for (const auto* a : da) {
      lo = std::min(lo, a->mean_ncer);
      hi = std::max(hi, a->mean_ncer);
    }
    double tail_lo = da[da.size() - 3]->mean_ncer, tail_hi = tail_lo;
    for (size_t i = da.size() - 3; i < da.size(); ++i) {
      tail_lo = std::min(tail_lo, da[i]->mean_ncer);
      tail_hi = std::max(tail_hi, da[i]->mean_ncer);
    }
    if (!(tail_hi - tail_lo <= 0.05 * (hi - lo))) ok = false;
    // below gamma = 1e-2 the two methods are indistinguishable
    for (size_t i = 0; i < da.size(); ++i) {
      if (cfg.sweep.values[i] < 1e-2 && !ci_overlap(*da[i], *ivl[i])) ok = false;
    }
    note << "DA_ERM " << da.front()->mean_ncer << " -> " << da.back()->mean_ncer
         << ", tail band " << 100.0 * (tail_hi - tail_lo) / (hi - lo) << "% of range";
  }
  verdict(3, ok,
          "criterion 3: augmentation strength buys accuracy up to a plateau and "
          "tiny strengths leave the methods tied (" +
              note.str() + ")");
}

// ---- criterion 4: population oracles -------------------------------------

void criterion_4() {
  bool ok = true;
  std::ostringstream note;

  // scalar with a valid instrument: x = z + c + n_x, y = x + c + n_y
  SemSpec iv = SemSpec::dims(1, 1, 1);
  iv.f(0) = 1.0;
  iv.gamma_mat(0, 0) = 1.0;
  iv.conf_x(0, 0) = 1.0;
  iv.conf_y(0) = 1.0;
  const Dataset div = sample(iv, 100000, 41);
  for (const double alpha : {0.01, 1.0, 100.0}) {
    const double expected = (4.0 * alpha + 1.0) / (3.0 * alpha + 1.0);
    const double got = fit_ivl(div.x, div.y, div.z, alpha).h(0);
    if (std::abs(got - expected) > 0.02) ok = false;
  }

  // scalar confounded ols: slope 3/2
  SemSpec conf = SemSpec::dims(1, 0, 1);
  conf.f(0) = 1.0;
  conf.conf_x(0, 0) = 1.0;
  conf.conf_y(0) = 1.0;
  const Dataset dconf = sample(conf, 100000, 42);
  const double ols = fit_ols(dconf.x, dconf.y).h(0);
  if (std::abs(ols - 1.5) > 0.02) ok = false;
  note << "ols " << ols;

  // two features, confounder on the second only
  SemSpec two = SemSpec::dims(2, 0, 1);
  two.f << 1.0, 0.0;
  two.conf_x << 0.0, 1.0;
  two.conf_y << 1.0;
  const Dataset dtwo = sample(two, 100000, 43);
  const LinearEstimate erm = fit_ols(dtwo.x, dtwo.y);
  if (std::abs(erm.h(0) - 1.0) > 0.02 || std::abs(erm.h(1) - 0.5) > 0.02) ok = false;
  const DaOperator da = nullspace_basis(two.f);
  const Dataset aug = apply(da, dtwo, 44);
  const LinearEstimate h_da = fit_ols(aug.x, aug.y);
  if (std::abs(h_da.h(0) - 1.0) > 0.02 || std::abs(h_da.h(1) - 1.0 / 3.0) > 0.02)
    ok = false;
  note << ", erm (" << erm.h(0) << ", " << erm.h(1) << "), da (" << h_da.h(0) << ", "
       << h_da.h(1) << ")";
  verdict(4, ok, "criterion 4: sampled fits hit the closed form population values (" +
                     note.str() + ")");
}

// ---- criterion 5: limit identities ----------------------------------------

void criterion_5() {
  bool ok = true;
  double worst_big = 0.0, worst_small = 0.0;
  Rng rng(51);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 500;
    const int m = 5, k = 5;
    Eigen::MatrixXd z(n, k), noise(n, m);
    Eigen::VectorXd eps(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) z(i, j) = rng.normal();
      for (int j = 0; j < m; ++j) noise(i, j) = rng.normal();
      eps(i) = rng.normal();
    }
    Eigen::MatrixXd a(k, m);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = (i == j ? 1.0 : 0.0) + 0.3 * rng.normal();
    Eigen::VectorXd beta(m);
    for (int j = 0; j < m; ++j) beta(j) = rng.normal();
    const Eigen::MatrixXd x = z * a + 0.5 * noise;
    const Eigen::VectorXd y = x * beta + eps;

    const Eigen::VectorXd h_ols = fit_ols(x, y).h;
    const Eigen::VectorXd h_big = fit_ivl(x, y, z, 1e8).h;
    const double rel_big = (h_big - h_ols).norm() / std::max(1.0, h_ols.norm());
    worst_big = std::max(worst_big, rel_big);
    if (rel_big > 1e-6) ok = false;

    const Eigen::VectorXd h_tsls = fit_2sls(x, y, z).h;
    const Eigen::VectorXd h_small = fit_ivl(x, y, z, 1e-8).h;
    const double rel_small = (h_small - h_tsls).norm() / std::max(1.0, h_tsls.norm());
    worst_small = std::max(worst_small, rel_small);
    if (rel_small > 1e-4) ok = false;
  }
  std::ostringstream note;
  note << "worst ols gap " << worst_big << ", worst 2sls gap " << worst_small;
  verdict(5, ok, "criterion 5: the interpolation limits collapse onto ols and "
                 "two stage least squares (" +
                     note.str() + ")");
}

// ---- shared random spec drawing for criteria 6 and 8 ----------------------

SemSpec random_cyclic_spec(Rng& rng) {
  const int m = 2 + int(rng.below(4));
  const int q = 1 + int(rng.below(3));
  SemSpec spec = SemSpec::dims(m, 0, q);
  Eigen::VectorXd u(m), w(m);
  for (int i = 0; i < m; ++i) {
    u(i) = rng.normal();
    w(i) = rng.normal();
  }
  u.normalize();
  w -= u.dot(w) * u;
  const double s = rng.uniform(0.5, 2.0);
  const double target = 1.9 * (rng.uniform() - 0.5);
  spec.f = s * u;
  spec.tau = (target / s) * u + 0.5 * w;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < q; ++j) spec.conf_x(i, j) = rng.normal();
  for (int j = 0; j < q; ++j) spec.conf_y(j) = rng.normal();
  spec.sigma = 0.05 + rng.uniform();
  spec.kappa = 1.0;
  return spec;
}

// ---- criterion 6: soft intervention equals the shifted observation --------

void criterion_6() {
  bool ok = true;
  double worst = 0.0;
  Rng rng(61);
  for (int rep = 0; rep < 1000; ++rep) {
    const SemSpec spec = random_cyclic_spec(rng);
    DaOperator da = nullspace_basis(spec.f);
    da.strength = 2.0 * rng.uniform();
    const Eigen::Index n = 20;
    const std::uint64_t seed = 6000 + rep;
    const Dataset obs = sample(spec, n, seed);
    const auto exo = draw_exogenous_block(spec, n, seed);
    Eigen::MatrixXd g(n, da.params());
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < da.params(); ++j) g(i, j) = rng.normal();
    const Dataset shifted = sample_soft_do(spec, da, g, exo);
    const Eigen::MatrixXd expect =
        obs.x + da.strength * (g * da.gamma_mat.transpose());
    const double scale = std::max(1.0, obs.x.cwiseAbs().maxCoeff());
    const double dx = (shifted.x - expect).cwiseAbs().maxCoeff() / scale;
    const double dy = (shifted.y - obs.y).cwiseAbs().maxCoeff() /
                      std::max(1.0, obs.y.cwiseAbs().maxCoeff());
    worst = std::max(worst, std::max(dx, dy));
    if (dx > 1e-8 || dy > 1e-8) ok = false;
  }
  std::ostringstream note;
  note << "worst deviation " << worst << " over 1000 systems";
  verdict(6, ok, "criterion 6: soft interventions reproduce the observational "
                 "draw shifted inside the invariant subspace (" +
                     note.str() + ")");
}

// ---- criterion 7: when augmentation must help and when it cannot ----------

void criterion_7() {
  const int m = 32, q = 15;
  const Eigen::Index n = 2048;
  const int trials = 25;
  std::vector<double> erm, da_orth, da_alig;

  // split the null space of f into a confounded block B and a clean block W;
  // augmenting along W leaves the confounded directions untouched, so the fit
  // matches plain least squares, while augmenting along B shrinks the bias
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed_mix(7000, std::uint64_t(t)));
    Eigen::VectorXd f(m);
    for (int i = 0; i < m; ++i) f(i) = rng.normal();
    Eigen::VectorXd eps(q);
    for (int j = 0; j < q; ++j) eps(j) = rng.normal();

    const Eigen::MatrixXd basis = nullspace_basis(f).gamma_mat;
    const Eigen::MatrixXd bconf = basis.leftCols(q);
    const Eigen::MatrixXd wfree = basis.rightCols(m - 1 - q);

    SemSpec spec = SemSpec::dims(m, 0, q);
    spec.f = f;
    spec.conf_x = bconf;
    spec.conf_y = eps;
    spec.sigma = 1.0;
    const Dataset data = sample(spec, n, seed_mix(7100, std::uint64_t(t)));

    DaOperator ortho;
    ortho.gamma_mat = wfree;
    const Dataset aug_o = apply(ortho, data, seed_mix(7200, std::uint64_t(t)));
    DaOperator aligned;
    aligned.gamma_mat = bconf;
    aligned.strength = 5.0;
    const Dataset aug_a = apply(aligned, data, seed_mix(7300, std::uint64_t(t)));

    EvalConfig eval;
    eval.truth_f = f;
    const Eigen::VectorXd h0 = Eigen::VectorXd::Zero(m);
    erm.push_back(ncer(fit_ols(data.x, data.y).h, h0, eval));
    da_orth.push_back(ncer(fit_ols(aug_o.x, aug_o.y).h, h0, eval));
    da_alig.push_back(ncer(fit_ols(aug_a.x, aug_a.y).h, h0, eval));
  }

  const Stats s_erm = mean_se(erm), s_orth = mean_se(da_orth), s_alig = mean_se(da_alig);
  bool ok = true;
  // augmentation orthogonal to the confounded block: a wash, CIs overlap
  if (std::abs(s_erm.mean - s_orth.mean) > 1.96 * (s_erm.se + s_orth.se)) ok = false;
  // augmentation along the confounded block: a clear win
  if (!(s_erm.mean - s_alig.mean > std::max(s_erm.se, s_alig.se))) ok = false;
  std::ostringstream note;
  note << "ERM " << s_erm.mean << ", orthogonal DA " << s_orth.mean
       << ", aligned DA " << s_alig.mean;
  verdict(7, ok, "criterion 7: augmentation is a wash off the confounded "
                 "directions and dominates along them (" +
                     note.str() + ")");
}

// ---- criterion 8: iterative equilibrium equals the reduced form -----------

void criterion_8() {
  bool ok = true;
  double worst = 0.0;
  Rng rng(81);
  for (int rep = 0; rep < 1000; ++rep) {
    const SemSpec spec = random_cyclic_spec(rng);
    const Eigen::Index n = 5;
    const std::uint64_t seed = 8000 + rep;
    const Dataset direct = sample(spec, n, seed);
    const IterativeSample iter = sample_iterative(spec, n, seed);
    const double scale = std::max(1.0, direct.x.cwiseAbs().maxCoeff());
    const double d = std::max((direct.x - iter.data.x).cwiseAbs().maxCoeff() / scale,
                              (direct.y - iter.data.y).cwiseAbs().maxCoeff() / scale);
    worst = std::max(worst, d);
    if (d > 1e-8) ok = false;
  }

  SemSpec singular = SemSpec::dims(1, 0, 1);
  singular.f(0) = 1.0;
  singular.tau(0) = 1.0;  // loop gain exactly 1
  if (validate_spec(singular).ok) ok = false;
  bool threw = false;
  try {
    (void)sample(singular, 4, 1);
  } catch (const std::invalid_argument&) {
    threw = true;
  }
  if (!threw) ok = false;
  std::ostringstream note;
  note << "worst deviation " << worst << " over 1000 systems, singular spec rejected";
  verdict(8, ok, "criterion 8: sweeping the cycle reproduces the simultaneous "
                 "solution and singular loops are refused (" +
                     note.str() + ")");
}

// ---- criterion 9: discrete xor system --------------------------------------

void criterion_9() {
  bool ok = true;
  const auto label = [](const std::vector<std::uint8_t>& x) {
    return parity_label(x, 1, 6);
  };
  DiscreteDataset big;
  try {
    big = discrete_xor_sem_sample(label, uniform_bits(10), 0.1, 100000, 91);
  } catch (const std::exception&) {
    ok = false;
  }
  if (big.x.size() != 100000 || big.max_sweeps > 5) ok = false;

  // interventional mean must be 0.5 * label + 0.25 within monte carlo error
  const std::int64_t n = 100000;
  const double sigma3 = 3.0 * std::sqrt(0.25 * 0.75 / double(n));
  std::vector<std::uint8_t> probe(11, 0);
  probe[1] = 1;  // parity 1
  double mean1 = 0;
  for (auto v : discrete_hard_do_y(label, probe, n, 92)) mean1 += v;
  mean1 /= double(n);
  if (std::abs(mean1 - 0.75) > sigma3) ok = false;
  probe[1] = 0;  // parity 0
  double mean0 = 0;
  for (auto v : discrete_hard_do_y(label, probe, n, 93)) mean0 += v;
  mean0 /= double(n);
  if (std::abs(mean0 - 0.25) > sigma3) ok = false;

  const DiscreteDemoReport rep = demo_discrete(0.1, 0.9, 50000, 94);
  if (!(rep.obs_accuracy < 0.5)) ok = false;
  if (std::abs(rep.ate_accuracy - 0.75) > 0.02) ok = false;
  std::ostringstream note;
  note << "do-means " << mean1 << "/" << mean0 << ", demo obs " << rep.obs_accuracy
       << " vs ate " << rep.ate_accuracy;
  verdict(9, ok, "criterion 9: the discrete cycle settles within budget, its "
                 "do-means match, and the flipped-environment demo splits the "
                 "predictors (" +
                     note.str() + ")");
}

// ---- criterion 10: projected risk decomposition ----------------------------

void criterion_10() {
  bool ok = true;
  double worst = 0.0;
  Rng rng(101);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 60;
    const int m = 4;
    const int k = 1 + int(rng.below(4));
    Eigen::MatrixXd x(n, m), z(n, k);
    Eigen::VectorXd y(n), h(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) x(i, j) = rng.normal();
      for (int j = 0; j < k; ++j) z(i, j) = rng.normal();
      y(i) = rng.normal();
    }
    for (int j = 0; j < m; ++j) h(j) = rng.normal();
    if (rep % 3 == 0 && k > 1) z.col(k - 1) = z.col(0);  // degenerate instruments too

    const Eigen::VectorXd fitted = x * h;
    const Eigen::VectorXd pf = conditional_projection(z, fitted);
    const Eigen::VectorXd py = conditional_projection(z, y);
    const double lhs = (y - pf).squaredNorm();
    const double rhs = (py - pf).squaredNorm() + (y - py).squaredNorm();
    const double rel = std::abs(lhs - rhs) / std::max(1.0, lhs);
    worst = std::max(worst, rel);
    if (rel > 1e-8) ok = false;
  }
  std::ostringstream note;
  note << "worst relative gap " << worst;
  verdict(10, ok, "criterion 10: projecting the fit splits the instrument risk "
                  "into orthogonal pieces exactly (" +
                      note.str() + ")");
}

// ---- criterion 11: byte level determinism -----------------------------------

void criterion_11() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "ivlreg_acceptance_det";
  fs::remove_all(root);
  fs::create_directories(root);

  bool ok = true;
  std::vector<std::string> dirs;
  for (int run = 0; run < 3; ++run) {
    ExperimentConfig cfg = fig4a_config();
    cfg.workers = run == 2 ? 8 : 1;
    cfg.plot = true;
    cfg.out_dir = (root / ("run" + std::to_string(run))).string();
    dirs.push_back(cfg.out_dir);
    try {
      write_sweep_outputs(run_sweep(cfg), cfg);
    } catch (const std::exception&) {
      ok = false;
    }
  }
  if (ok) {
    for (const char* name : {"results.csv", "aggregate.csv", "selection.csv", "sweep.svg"}) {
      const std::string base = slurp(dirs[0] + "/" + name);
      if (base.empty()) {
        ok = false;
        continue;
      }
      if (slurp(dirs[1] + "/" + name) != base) ok = false;
      if (slurp(dirs[2] + "/" + name) != base) ok = false;
    }
  }
  fs::remove_all(root);
  verdict(11, ok, "criterion 11: the headline sweep is byte identical across "
                  "repeat runs and worker counts 1 and 8");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures == 0) std::printf("all 11 criteria passed\n");
  else std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
