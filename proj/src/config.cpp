#include "ivlreg/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ivlreg/dataset.hpp"

namespace ivlreg {

using nlohmann::json;

namespace {

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd mat_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string(name) + " must be a nested list");
  const Eigen::Index rows = Eigen::Index(j.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[size_t(i)];
    if (!row.is_array()) throw ConfigError(std::string(name) + " must be a nested list");
    if (cols < 0) {
      cols = Eigen::Index(row.size());
      m.resize(rows, cols);
    }
    if (Eigen::Index(row.size()) != cols)
      throw ConfigError(std::string(name) + " rows have unequal lengths");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[size_t(c)].get<double>();
  }
  if (rows == 0) m.resize(0, 0);
  return m;
}

Eigen::VectorXd vec_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string(name) + " must be a list");
  Eigen::VectorXd v(Eigen::Index(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[size_t(i)].get<double>();
  return v;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

json sem_to_json(const SemSpec& s) {
  json j;
  j["m"] = s.m;
  j["k"] = s.k;
  j["q"] = s.q;
  j["tau"] = vec_to_json(s.tau);
  j["f"] = vec_to_json(s.f);
  j["gamma_mat"] = mat_to_json(s.gamma_mat);
  j["conf_x"] = mat_to_json(s.conf_x);
  j["conf_y"] = vec_to_json(s.conf_y);
  j["sigma"] = s.sigma;
  j["kappa"] = s.kappa;
  if (s.exo_cov_z.size() > 0) j["exo_cov_z"] = mat_to_json(s.exo_cov_z);
  if (s.exo_cov_c.size() > 0) j["exo_cov_c"] = mat_to_json(s.exo_cov_c);
  return j;
}

SemSpec sem_from_json(const json& j) {
  reject_unknown(j, {"m", "k", "q", "tau", "f", "gamma_mat", "conf_x", "conf_y",
                     "sigma", "kappa", "exo_cov_z", "exo_cov_c"}, "sem");
  const int m = j.value("m", 1);
  const int k = j.value("k", 0);
  const int q = j.value("q", 1);
  SemSpec s = SemSpec::dims(m, k, q);
  if (j.contains("tau")) s.tau = vec_from_json(j["tau"], "tau");
  if (j.contains("f")) s.f = vec_from_json(j["f"], "f");
  if (j.contains("gamma_mat")) s.gamma_mat = mat_from_json(j["gamma_mat"], "gamma_mat");
  if (j.contains("conf_x")) s.conf_x = mat_from_json(j["conf_x"], "conf_x");
  if (j.contains("conf_y")) s.conf_y = vec_from_json(j["conf_y"], "conf_y");
  s.sigma = j.value("sigma", 1.0);
  s.kappa = j.value("kappa", 1.0);
  if (j.contains("exo_cov_z")) s.exo_cov_z = mat_from_json(j["exo_cov_z"], "exo_cov_z");
  if (j.contains("exo_cov_c")) s.exo_cov_c = mat_from_json(j["exo_cov_c"], "exo_cov_c");
  return s;
}

double parse_paren_arg(const std::string& text, size_t open, const char* what) {
  if (text.back() != ')') throw ConfigError(std::string("malformed ") + what);
  const std::string inner = text.substr(open + 1, text.size() - open - 2);
  try {
    size_t used = 0;
    const double v = std::stod(inner, &used);
    if (used != inner.size()) throw ConfigError("");
    return v;
  } catch (...) {
    throw ConfigError(std::string("bad numeric argument in ") + what + ": " + text);
  }
}

}  // namespace

DaDirective DaDirective::parse(const std::string& text) {
  DaDirective d;
  if (text == "nullspace") {
    d.kind = Kind::nullspace;
    return d;
  }
  if (text.rfind("subset(", 0) == 0) {
    d.kind = Kind::subset;
    d.keep_prob = parse_paren_arg(text, 6, "subset directive");
    if (!(d.keep_prob > 0.0) || d.keep_prob > 1.0)
      throw ConfigError("subset keep_prob must be in (0, 1]");
    return d;
  }
  if (text.rfind("gaussian(", 0) == 0) {
    d.kind = Kind::gaussian;
    d.scale = parse_paren_arg(text, 8, "gaussian directive");
    if (d.scale < 0.0) throw ConfigError("gaussian scale must be >= 0");
    return d;
  }
  throw ConfigError("unknown da directive: " + text);
}

std::string DaDirective::str() const {
  switch (kind) {
    case Kind::nullspace: return "nullspace";
    case Kind::subset: {
      std::ostringstream os;
      os << "subset(" << keep_prob << ")";
      return os.str();
    }
    case Kind::gaussian: {
      std::ostringstream os;
      os << "gaussian(" << scale << ")";
      return os.str();
    }
    case Kind::explicit_op: return "explicit";
  }
  return "?";
}

MethodSpec MethodSpec::parse(const std::string& text) {
  MethodSpec m;
  if (text == "ERM") {
    m.kind = Kind::erm;
    return m;
  }
  if (text == "DA_ERM") {
    m.kind = Kind::da_erm;
    return m;
  }
  if (text == "DA_IV") {
    m.kind = Kind::da_iv;
    return m;
  }
  if (text == "DA_IVL") {
    m.kind = Kind::da_ivl;  // alpha comes from the sweep coordinate
    return m;
  }
  if (text.rfind("DA_IVL(", 0) == 0) {
    m.kind = Kind::da_ivl;
    const std::string inner = text.substr(7, text.size() - 8);
    if (text.back() != ')') throw ConfigError("malformed method: " + text);
    if (inner == "cv") m.strategy = Strategy::cv;
    else if (inner == "lcv") m.strategy = Strategy::lcv;
    else if (inner == "cc") m.strategy = Strategy::cc;
    else {
      m.strategy = Strategy::fixed;
      m.alpha = parse_paren_arg(text, 6, "method alpha");
      if (!(m.alpha > 0.0)) throw ConfigError("method alpha must be > 0");
    }
    return m;
  }
  throw ConfigError("unknown method: " + text);
}

std::string MethodSpec::label() const {
  switch (kind) {
    case Kind::erm: return "ERM";
    case Kind::da_erm: return "DA_ERM";
    case Kind::da_iv: return "DA_IV";
    case Kind::da_ivl: break;
  }
  switch (strategy) {
    case Strategy::cv: return "DA_IVL(cv)";
    case Strategy::lcv: return "DA_IVL(lcv)";
    case Strategy::cc: return "DA_IVL(cc)";
    case Strategy::fixed: break;
  }
  if (std::isnan(alpha)) return "DA_IVL";
  return "DA_IVL(" + format_double(alpha) + ")";
}

ExperimentConfig default_protocol() {
  ExperimentConfig cfg;
  const int m = 32;
  cfg.sem = SemSpec::dims(m, 0, m);
  cfg.sem.sigma = 0.1;
  cfg.sem.kappa = 1.0;
  cfg.redraw_sem = true;
  cfg.da.kind = DaDirective::Kind::nullspace;
  cfg.gamma = 1.0;
  cfg.methods = {MethodSpec::parse("ERM"), MethodSpec::parse("DA_ERM"),
                 MethodSpec::parse("DA_IVL(cc)")};
  cfg.n = 2048;
  cfg.trials = 25;
  cfg.master_seed = 1;
  return cfg;
}

namespace {

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["sem"] = sem_to_json(cfg.sem);
  j["redraw_sem"] = cfg.redraw_sem;
  if (cfg.da.kind == DaDirective::Kind::explicit_op) {
    json d;
    d["gamma_mat"] = mat_to_json(cfg.da.op.gamma_mat);
    d["strength"] = cfg.da.op.strength;
    if (cfg.da.op.g_cov.size() > 0) d["g_cov"] = mat_to_json(cfg.da.op.g_cov);
    j["da"] = std::move(d);
  } else {
    j["da"] = cfg.da.str();
  }
  j["gamma"] = cfg.gamma;
  json methods = json::array();
  for (const auto& m : cfg.methods) methods.push_back(m.label());
  j["methods"] = std::move(methods);
  if (!cfg.sweep.axis.empty()) {
    json s;
    s["axis"] = cfg.sweep.axis;
    s["values"] = cfg.sweep.values;
    j["sweep"] = std::move(s);
  }
  j["n"] = cfg.n;
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["selection_grid"] = cfg.selection_grid.values;
  j["norm"] = cfg.norm == CerNorm::euclidean ? "euclidean" : "weighted";
  j["out_dir"] = cfg.out_dir;
  j["workers"] = cfg.workers;
  j["plot"] = cfg.plot;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j, {"sem", "redraw_sem", "da", "gamma", "methods", "sweep", "n",
                     "trials", "master_seed", "selection_grid", "norm", "out_dir",
                     "workers", "plot"}, "experiment config");
  ExperimentConfig cfg;
  if (j.contains("sem")) cfg.sem = sem_from_json(j["sem"]);
  cfg.redraw_sem = j.value("redraw_sem", true);
  if (j.contains("da")) {
    if (j["da"].is_string()) {
      cfg.da = DaDirective::parse(j["da"].get<std::string>());
    } else {
      const auto& d = j["da"];
      reject_unknown(d, {"gamma_mat", "strength", "g_cov"}, "da");
      cfg.da.kind = DaDirective::Kind::explicit_op;
      cfg.da.op.gamma_mat = mat_from_json(d.at("gamma_mat"), "da.gamma_mat");
      cfg.da.op.strength = d.value("strength", 1.0);
      if (d.contains("g_cov")) cfg.da.op.g_cov = mat_from_json(d["g_cov"], "da.g_cov");
    }
  }
  cfg.gamma = j.value("gamma", 1.0);
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j["methods"]) cfg.methods.push_back(MethodSpec::parse(m.get<std::string>()));
  }
  if (j.contains("sweep")) {
    reject_unknown(j["sweep"], {"axis", "values"}, "sweep");
    cfg.sweep.axis = j["sweep"].value("axis", "");
    if (j["sweep"].contains("values"))
      cfg.sweep.values = j["sweep"]["values"].get<std::vector<double>>();
  }
  cfg.n = j.value("n", std::int64_t(2048));
  cfg.trials = j.value("trials", 25);
  cfg.master_seed = j.value("master_seed", std::uint64_t(1));
  if (j.contains("selection_grid")) {
    const auto& g = j["selection_grid"];
    if (g.is_array()) {
      cfg.selection_grid.values = g.get<std::vector<double>>();
    } else {
      reject_unknown(g, {"lo", "hi", "count"}, "selection_grid");
      cfg.selection_grid = AlphaGrid::log_space(g.value("lo", 1e-4), g.value("hi", 1.0),
                                                g.value("count", 32));
    }
  }
  if (j.contains("norm")) {
    const auto s = j["norm"].get<std::string>();
    if (s == "euclidean") cfg.norm = CerNorm::euclidean;
    else if (s == "weighted") cfg.norm = CerNorm::weighted;
    else throw ConfigError("norm must be 'euclidean' or 'weighted'");
  }
  cfg.out_dir = j.value("out_dir", std::string("out"));
  cfg.workers = j.value("workers", 1);
  cfg.plot = j.value("plot", true);
  return cfg;
}

json parse_json_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cannot parse ") + what + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config: " + path);
  out << experiment_config_json(cfg) << "\n";
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
  return config_to_json(cfg).dump(2);
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  return config_from_json(parse_json_text(json_text, "experiment config"));
}

SemSpec parse_sem_spec(const std::string& json_text) {
  return sem_from_json(parse_json_text(json_text, "sem spec"));
}

std::string sem_spec_json(const SemSpec& spec) { return sem_to_json(spec).dump(2); }

}  // namespace ivlreg
