#include "memliou/records.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <initializer_list>
#include <set>

#include "memliou/effective_dynamics.hpp"
#include "memliou/errors.hpp"
#include "memliou/spectral_longtime.hpp"
#include "memliou/time_domain.hpp"
#include "memliou/version.hpp"

namespace memliou {

namespace {

// Shortest round-trip decimal, matching what the JSON writer emits.
std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

const Json& expect_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

void check_keys(const Json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key()))
      throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
}

double as_double(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

int as_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected a boolean");
  return v.get<bool>();
}

std::uint64_t as_uint64(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0))
    throw ConfigError(path, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* p, std::size_t n) {
    const unsigned char* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void matrix(const Matrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) {
        const double re = m(i, j).real(), im = m(i, j).imag();
        bytes(&re, sizeof re);
        bytes(&im, sizeof im);
      }
  }
};

InitialStateSpec parse_initial(const Json& j, const std::string& path) {
  expect_object(j, path);
  if (!j.contains("kind")) throw ConfigError(path + ".kind", "missing");
  const std::string kind = as_string(j.at("kind"), path + ".kind");
  if (kind == "product") {
    check_keys(j, path, {"kind", "rho_system"});
    if (!j.contains("rho_system")) throw ConfigError(path + ".rho_system", "missing");
    return InitialStateSpec::product(matrix_from_json(j.at("rho_system"), path + ".rho_system"));
  }
  if (kind == "full") {
    check_keys(j, path, {"kind", "rho_total"});
    if (!j.contains("rho_total")) throw ConfigError(path + ".rho_total", "missing");
    return InitialStateSpec::full(matrix_from_json(j.at("rho_total"), path + ".rho_total"));
  }
  if (kind == "product_plus_correlation") {
    check_keys(j, path, {"kind", "rho_system", "delta"});
    if (!j.contains("rho_system")) throw ConfigError(path + ".rho_system", "missing");
    if (!j.contains("delta")) throw ConfigError(path + ".delta", "missing");
    return InitialStateSpec::product_plus_correlation(
        matrix_from_json(j.at("rho_system"), path + ".rho_system"),
        matrix_from_json(j.at("delta"), path + ".delta"));
  }
  throw ConfigError(path + ".kind", "expected product, full or product_plus_correlation");
}

CompositeModel parse_model(const Json& j) {
  expect_object(j, "model");
  if (j.contains("catalog")) {
    check_keys(j, "model", {"catalog", "seed", "d_env", "initial"});
    const std::string name = as_string(j.at("catalog"), "model.catalog");
    const std::uint64_t seed =
        j.contains("seed") ? as_uint64(j.at("seed"), "model.seed") : 0;
    const Index d_env =
        j.contains("d_env") ? as_int(j.at("d_env"), "model.d_env") : 0;
    CompositeModel m = catalog_model(name, seed, d_env);
    if (j.contains("initial")) m = m.with_initial(parse_initial(j.at("initial"), "model.initial"));
    return m;
  }
  check_keys(j, "model",
             {"d_system", "d_env", "h_system", "h_env", "couplings", "rho_env", "initial",
              "sector_projector"});
  for (const char* req : {"d_system", "d_env", "h_system", "h_env", "rho_env", "initial"})
    if (!j.contains(req)) throw ConfigError(std::string("model.") + req, "missing");
  CompositeModel m;
  m.d_system = as_int(j.at("d_system"), "model.d_system");
  m.d_env = as_int(j.at("d_env"), "model.d_env");
  m.h_system = matrix_from_json(j.at("h_system"), "model.h_system");
  m.h_env = matrix_from_json(j.at("h_env"), "model.h_env");
  if (j.contains("couplings")) {
    if (!j.at("couplings").is_array()) throw ConfigError("model.couplings", "expected an array");
    int k = 0;
    for (const Json& c : j.at("couplings")) {
      const std::string path = "model.couplings[" + std::to_string(k++) + "]";
      expect_object(c, path);
      check_keys(c, path, {"system", "env"});
      if (!c.contains("system")) throw ConfigError(path + ".system", "missing");
      if (!c.contains("env")) throw ConfigError(path + ".env", "missing");
      m.couplings.push_back({matrix_from_json(c.at("system"), path + ".system"),
                             matrix_from_json(c.at("env"), path + ".env")});
    }
  }
  m.rho_env = matrix_from_json(j.at("rho_env"), "model.rho_env");
  m.initial = parse_initial(j.at("initial"), "model.initial");
  if (j.contains("sector_projector"))
    m.sector_projector = matrix_from_json(j.at("sector_projector"), "model.sector_projector");
  m.validate();
  return m;
}

std::vector<Complex> verify_z_grid(const VerifyParams& p, double scale) {
  const int n = p.z_points;
  const double w = p.re_half_width.value_or(2.0 * std::max(scale, 0.1));
  std::vector<Complex> zs(n);
  for (int j = 0; j < n; ++j) {
    const double f = n == 1 ? 0.0 : static_cast<double>(j) / (n - 1);
    const double im = p.im_min * std::pow(p.im_max / p.im_min, f);
    const double re = n == 1 ? 0.0 : -w + 2.0 * w * f;
    zs[j] = Complex(re, im);
  }
  return zs;
}

Json run_verify(const ModelPipeline& pipe, const VerifyParams& p, Exec exec, Json& params,
                bool& violated) {
  if (p.z_points < 1) throw ConfigError("params.z_points", "need at least one point");
  if (!(p.im_min >= kMinImagFrequency)) throw ConfigError("params.im_min", "too small");
  if (!(p.im_max >= p.im_min)) throw ConfigError("params.im_max", "must be >= im_min");
  if (!(p.tolerance > 0)) throw ConfigError("params.tolerance", "must be positive");
  const double w = p.re_half_width.value_or(2.0 * std::max(pipe.scale, 0.1));
  const std::vector<Complex> zs = verify_z_grid(p, pipe.scale);
  const std::vector<ResolventCheck> checks = verify_grid(pipe, zs, p.probe_seed, exec);

  params = Json{{"z_points", p.z_points},   {"im_min", p.im_min},
                {"im_max", p.im_max},       {"re_half_width", w},
                {"tolerance", p.tolerance}, {"probe_seed", p.probe_seed}};

  Json points = Json::array();
  double max_embed = 0, max_cross = 0, max_trace = 0, max_zero = 0;
  for (const auto& c : checks) {
    points.push_back(Json{{"z", complex_to_json(c.z)},
                          {"r_embed", c.r_embed},
                          {"r_cross", c.r_cross},
                          {"trace_dev", c.trace_dev},
                          {"left_zero_norm", c.left_zero_norm}});
    max_embed = std::max(max_embed, c.r_embed);
    max_cross = std::max(max_cross, c.r_cross);
    max_trace = std::max(max_trace, c.trace_dev);
    max_zero = std::max(max_zero, c.left_zero_norm);
  }
  violated = max_embed > p.tolerance || max_cross > p.tolerance;
  return Json{{"points", points},
              {"max_r_embed", max_embed},
              {"max_r_cross", max_cross},
              {"max_trace_dev", max_trace},
              {"max_left_zero_norm", max_zero},
              {"passed", !violated}};
}

Json run_evolve(const ModelPipeline& pipe, const EvolveParams& p, Exec exec, Json& params) {
  if (p.t_count < 1) throw ConfigError("params.t_count", "need at least one time");
  const TimeGrid grid = TimeGrid::uniform(p.t_min, p.t_max, static_cast<std::size_t>(p.t_count));
  ContourSpec contour = default_contour(pipe.scale, grid.t_max());
  if (p.epsilon) contour.epsilon = *p.epsilon;
  if (p.omega_max) contour.omega_max = *p.omega_max;
  if (p.n_points) contour.n_points = static_cast<std::size_t>(*p.n_points);
  contour.tail_subtraction = p.tail_subtraction;
  const Trajectory traj = inverse_laplace_evolve(pipe, contour, grid, exec);

  params = Json{{"t_min", p.t_min},
                {"t_max", p.t_max},
                {"t_count", p.t_count},
                {"epsilon", contour.epsilon},
                {"omega_max", contour.omega_max},
                {"n_points", static_cast<std::uint64_t>(contour.n_points)},
                {"tail_subtraction", contour.tail_subtraction}};

  Json states = Json::array();
  for (const Matrix& s : traj.states) states.push_back(matrix_to_json(s));
  return Json{{"times", traj.grid.times},
              {"states", states},
              {"method", traj.method},
              {"hermiticity_defect", traj.hermiticity_defect}};
}

Json run_freq_sweep(const ModelPipeline& pipe, const FreqSweepParams& p, Exec exec,
                    Json& params) {
  if (p.count < 1) throw ConfigError("params.count", "need at least one point");
  const double lo = p.omega_min.value_or(-2.0 * std::max(pipe.scale, 0.1));
  const double hi = p.omega_max.value_or(2.0 * std::max(pipe.scale, 0.1));
  const double eps = p.epsilon.value_or(0.05 * std::max(pipe.scale, 0.1));
  if (!(hi >= lo)) throw ConfigError("params.omega_max", "must be >= omega_min");
  if (!(eps >= kMinImagFrequency)) throw ConfigError("params.epsilon", "too small");

  std::vector<Complex> zs(p.count);
  for (int j = 0; j < p.count; ++j) {
    const double f = p.count == 1 ? 0.5 : static_cast<double>(j) / (p.count - 1);
    zs[j] = Complex(lo + (hi - lo) * f, eps);
  }
  const std::vector<FreqSweepPoint> pts = sweep_frequency_grid(pipe, zs, exec);

  params = Json{{"omega_min", lo}, {"omega_max", hi}, {"count", p.count}, {"epsilon", eps}};

  Json points = Json::array();
  for (const auto& pt : pts) {
    Json ev = Json::array();
    for (Index k = 0; k < pt.l_eff_eigenvalues.size(); ++k)
      ev.push_back(complex_to_json(pt.l_eff_eigenvalues(k)));
    points.push_back(Json{{"z", complex_to_json(pt.z)},
                          {"rho", matrix_to_json(pt.rho)},
                          {"l_eff_eigenvalues", ev},
                          {"condition", pt.condition}});
  }
  return Json{{"points", points}};
}

Json run_spectrum(const ModelPipeline& pipe, const SpectrumParams& p, Json& params) {
  if (!(p.cluster_tol > 0)) throw ConfigError("params.cluster_tol", "must be positive");
  require_upper_half(p.z);
  const EffectiveLiouvilleEval eval = pipe.solver.effective_liouville(p.z);
  const SpectralData spec = spectrum_effective(eval);
  const ZeroModeProjector zm = zero_mode_projector(spec, p.cluster_tol);

  params = Json{{"z", complex_to_json(p.z)}, {"cluster_tol", p.cluster_tol}};

  Json ev = Json::array();
  for (Index k = 0; k < spec.eigenvalues.size(); ++k)
    ev.push_back(complex_to_json(spec.eigenvalues(k)));
  return Json{{"l_eff", matrix_to_json(eval.l_eff)},
              {"condition", eval.condition},
              {"eigenvalues", ev},
              {"biorth_defect", spec.biorth_defect},
              {"defective", spec.defective},
              {"zero_mode",
               Json{{"degeneracy", zm.degeneracy},
                    {"rho_inf", matrix_to_json(zm.rho_inf)},
                    {"projector", matrix_to_json(zm.projector)}}}};
}

Json run_longtime(const ModelPipeline& pipe, const LongtimeParams& p, Exec exec, Json& params) {
  const ExtrapolationResult ext = long_time_limit_extrapolated(pipe, p.eps_seq, exec);
  const LongTimeFormulaResult formula = long_time_formula(pipe, p.eps_ref);

  params = Json{{"eps_seq", p.eps_seq}, {"eps_ref", formula.eps_ref}};

  return Json{
      {"extrapolation",
       Json{{"rho_inf", matrix_to_json(ext.rho_inf)},
            {"step_diffs", ext.step_diffs},
            {"converged", ext.converged}}},
      {"formula",
       Json{{"rho_inf", matrix_to_json(formula.rho_inf)},
            {"degeneracy", formula.degeneracy},
            {"degenerate", formula.degenerate},
            {"rho0_independence_defect", formula.rho0_independence_defect}}},
      {"agreement", max_abs(ext.rho_inf - formula.rho_inf)},
      {"note",
       "finite environment: the stationary limit is evaluated at finite epsilon and the "
       "extrapolation carries an initial-state-dependent finite-size remainder"}};
}

Json run_diagnose(const ModelPipeline& pipe, const DiagnoseParams& p, Json& params) {
  const TimescaleDiagnostics d = timescale_diagnostics(pipe, p.eps_ref);
  params = Json{{"eps_ref", d.eps_ref}};
  return Json{{"coupled", d.coupled},
              {"t_pq", json_number(d.t_pq)},
              {"t_q_z", json_number(d.t_q_z)},
              {"tau", json_number(d.tau)},
              {"correlation_ratio", json_number(d.correlation_ratio)},
              {"verdict", d.verdict}};
}

Json run_catalog() {
  Json entries = Json::array();
  const struct {
    const char* name;
    const char* what;
  } items[] = {
      {"QB3", "qubit against a three-level environment with a fixed hermitian coupling "
              "profile and a thermal (beta = 1) reference state"},
      {"GENERIC", "qubit against a seeded gaussian-random environment, maximally mixed "
                  "reference state, spectrum kept gap-free by redraws"},
      {"DECOUPLED", "sector-conserving diagonal coupling; carries a sector projector and "
                    "keeps a two-fold stationary degeneracy"},
      {"DEGENERATE", "sector-conserving coupling with a fully degenerate system "
                     "Hamiltonian"},
  };
  for (const auto& item : items) {
    const CompositeModel m = catalog_model(item.name);
    entries.push_back(Json{{"name", item.name},
                           {"d_system", m.d_system},
                           {"default_d_env", m.d_env},
                           {"couplings", m.couplings.size()},
                           {"has_sector_projector", m.sector_projector.size() != 0},
                           {"description", item.what}});
  }
  return Json{{"models", entries}};
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) throw ConfigError(context, "expected a nonempty array of rows");
  const Index rows = static_cast<Index>(j.size());
  Index cols = -1;
  Matrix m;
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array()) throw ConfigError(context, "expected rows to be arrays");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      if (cols == 0) throw ConfigError(context, "empty row");
      m = Matrix::Zero(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      throw ConfigError(context, "ragged rows");
    }
    for (Index k = 0; k < cols; ++k)
      m(i, k) = complex_from_json(row.at(static_cast<std::size_t>(k)),
                                  context + "[" + std::to_string(i) + "][" +
                                      std::to_string(k) + "]");
  }
  return m;
}

Json complex_to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

Complex complex_from_json(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 2 || !j.at(0).is_number() || !j.at(1).is_number())
    throw ConfigError(context, "expected [re, im]");
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

std::string model_fingerprint(const CompositeModel& m) {
  Fnv1a f;
  f.u64(static_cast<std::uint64_t>(m.d_system));
  f.u64(static_cast<std::uint64_t>(m.d_env));
  f.matrix(m.h_system);
  f.matrix(m.h_env);
  f.u64(m.couplings.size());
  for (const auto& c : m.couplings) {
    f.matrix(c.system_op);
    f.matrix(c.env_op);
  }
  f.matrix(m.rho_env);
  f.u64(static_cast<std::uint64_t>(m.initial.kind));
  switch (m.initial.kind) {
    case InitialKind::Product:
      f.matrix(m.initial.rho_system);
      break;
    case InitialKind::FullMatrix:
      f.matrix(m.initial.rho_total);
      break;
    case InitialKind::ProductPlusCorrelation:
      f.matrix(m.initial.rho_system);
      f.matrix(m.initial.delta);
      break;
  }
  f.u64(m.sector_projector.size() != 0);
  if (m.sector_projector.size() != 0) f.matrix(m.sector_projector);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
  return buf;
}

RunConfig parse_config(const std::string& text, const std::string& command) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config_json(doc, command);
}

RunConfig parse_config_json(const Json& doc, const std::string& command) {
  static const std::set<std::string> known = {"verify",  "evolve",   "freq-sweep", "spectrum",
                                              "longtime", "diagnose", "catalog"};
  if (!known.count(command)) throw ConfigError("command", "unknown command '" + command + "'");

  RunConfig cfg;
  cfg.command = command;
  expect_object(doc, "config");
  check_keys(doc, "", {"model", "params"});
  if (command != "catalog") {
    if (!doc.contains("model")) throw ConfigError("model", "missing");
    cfg.model = parse_model(doc.at("model"));
  } else if (doc.contains("model")) {
    cfg.model = parse_model(doc.at("model"));
  }

  const Json params = doc.contains("params") ? doc.at("params") : Json::object();
  expect_object(params, "params");

  if (command == "verify") {
    check_keys(params, "params",
               {"z_points", "im_min", "im_max", "re_half_width", "tolerance", "probe_seed"});
    auto& p = cfg.verify;
    if (params.contains("z_points")) p.z_points = as_int(params.at("z_points"), "params.z_points");
    if (params.contains("im_min")) p.im_min = as_double(params.at("im_min"), "params.im_min");
    if (params.contains("im_max")) p.im_max = as_double(params.at("im_max"), "params.im_max");
    if (params.contains("re_half_width"))
      p.re_half_width = as_double(params.at("re_half_width"), "params.re_half_width");
    if (params.contains("tolerance"))
      p.tolerance = as_double(params.at("tolerance"), "params.tolerance");
    if (params.contains("probe_seed"))
      p.probe_seed = as_uint64(params.at("probe_seed"), "params.probe_seed");
  } else if (command == "evolve") {
    check_keys(params, "params",
               {"t_min", "t_max", "t_count", "epsilon", "omega_max", "n_points",
                "tail_subtraction"});
    auto& p = cfg.evolve;
    if (params.contains("t_min")) p.t_min = as_double(params.at("t_min"), "params.t_min");
    if (params.contains("t_max")) p.t_max = as_double(params.at("t_max"), "params.t_max");
    if (params.contains("t_count")) p.t_count = as_int(params.at("t_count"), "params.t_count");
    if (params.contains("epsilon"))
      p.epsilon = as_double(params.at("epsilon"), "params.epsilon");
    if (params.contains("omega_max"))
      p.omega_max = as_double(params.at("omega_max"), "params.omega_max");
    if (params.contains("n_points")) p.n_points = as_int(params.at("n_points"), "params.n_points");
    if (params.contains("tail_subtraction"))
      p.tail_subtraction = as_bool(params.at("tail_subtraction"), "params.tail_subtraction");
  } else if (command == "freq-sweep") {
    check_keys(params, "params", {"omega_min", "omega_max", "count", "epsilon"});
    auto& p = cfg.freq_sweep;
    if (params.contains("omega_min"))
      p.omega_min = as_double(params.at("omega_min"), "params.omega_min");
    if (params.contains("omega_max"))
      p.omega_max = as_double(params.at("omega_max"), "params.omega_max");
    if (params.contains("count")) p.count = as_int(params.at("count"), "params.count");
    if (params.contains("epsilon"))
      p.epsilon = as_double(params.at("epsilon"), "params.epsilon");
  } else if (command == "spectrum") {
    check_keys(params, "params", {"z", "cluster_tol"});
    auto& p = cfg.spectrum;
    if (params.contains("z")) p.z = complex_from_json(params.at("z"), "params.z");
    if (params.contains("cluster_tol"))
      p.cluster_tol = as_double(params.at("cluster_tol"), "params.cluster_tol");
  } else if (command == "longtime") {
    check_keys(params, "params", {"eps_seq", "eps_ref"});
    auto& p = cfg.longtime;
    if (params.contains("eps_seq")) {
      if (!params.at("eps_seq").is_array())
        throw ConfigError("params.eps_seq", "expected an array of numbers");
      p.eps_seq.clear();
      for (const Json& v : params.at("eps_seq"))
        p.eps_seq.push_back(as_double(v, "params.eps_seq"));
    }
    if (params.contains("eps_ref"))
      p.eps_ref = as_double(params.at("eps_ref"), "params.eps_ref");
  } else if (command == "diagnose") {
    check_keys(params, "params", {"eps_ref"});
    if (params.contains("eps_ref"))
      cfg.diagnose.eps_ref = as_double(params.at("eps_ref"), "params.eps_ref");
  } else {  // catalog takes no parameters
    check_keys(params, "params", {});
  }
  return cfg;
}

std::string ResultRecord::to_string() const { return doc.dump(2) + "\n"; }

ResultRecord run_command(const RunConfig& config, Exec exec) {
  ResultRecord rec;
  Json params = Json::object();
  Json payload;

  if (config.command == "catalog") {
    payload = run_catalog();
    rec.doc = Json{{"artifact_version", kArtifactVersion},
                   {"command", config.command},
                   {"parameters", params},
                   {"payload", payload}};
    return rec;
  }

  const ModelPipeline pipe = build_pipeline(config.model);
  Json diagnostics = Json{{"scale", pipe.scale},
                          {"dim_total", static_cast<std::uint64_t>(config.model.dim_total())},
                          {"dim_q", static_cast<std::uint64_t>(pipe.solver.dim_q())},
                          {"correlated_initial", pipe.delta_corr.norm() > 1e-12}};

  if (config.command == "verify") {
    payload = run_verify(pipe, config.verify, exec, params, rec.threshold_violated);
  } else if (config.command == "evolve") {
    payload = run_evolve(pipe, config.evolve, exec, params);
  } else if (config.command == "freq-sweep") {
    payload = run_freq_sweep(pipe, config.freq_sweep, exec, params);
  } else if (config.command == "spectrum") {
    payload = run_spectrum(pipe, config.spectrum, params);
  } else if (config.command == "longtime") {
    payload = run_longtime(pipe, config.longtime, exec, params);
  } else if (config.command == "diagnose") {
    payload = run_diagnose(pipe, config.diagnose, params);
  } else {
    throw ConfigError("command", "unknown command '" + config.command + "'");
  }

  rec.doc = Json{{"artifact_version", kArtifactVersion},
                 {"command", config.command},
                 {"model_fingerprint", model_fingerprint(config.model)},
                 {"parameters", params},
                 {"payload", payload},
                 {"diagnostics", diagnostics}};
  return rec;
}

std::string record_to_table(const ResultRecord& record) {
  const Json& doc = record.doc;
  const std::string command = doc.at("command").get<std::string>();
  std::string out;

  if (command == "verify") {
    out = "re_z,im_z,r_embed,r_cross,trace_dev,left_zero_norm\n";
    for (const Json& pt : doc.at("payload").at("points")) {
      const Complex z = complex_from_json(pt.at("z"), "record.z");
      out += fmt_double(z.real()) + "," + fmt_double(z.imag()) + "," +
             fmt_double(pt.at("r_embed").get<double>()) + "," +
             fmt_double(pt.at("r_cross").get<double>()) + "," +
             fmt_double(pt.at("trace_dev").get<double>()) + "," +
             fmt_double(pt.at("left_zero_norm").get<double>()) + "\n";
    }
    return out;
  }

  if (command == "evolve") {
    const Json& times = doc.at("payload").at("times");
    const Json& states = doc.at("payload").at("states");
    if (states.empty()) throw ConfigError("record", "no states to tabulate");
    const Matrix first = matrix_from_json(states.at(0), "record.states");
    out = "t";
    for (Index i = 0; i < first.rows(); ++i)
      for (Index j = 0; j < first.cols(); ++j) {
        const std::string tag = std::to_string(i) + std::to_string(j);
        out += ",rho_" + tag + "_re,rho_" + tag + "_im";
      }
    out += "\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
      const Matrix s = matrix_from_json(states.at(k), "record.states");
      out += fmt_double(times.at(k).get<double>());
      for (Index i = 0; i < s.rows(); ++i)
        for (Index j = 0; j < s.cols(); ++j)
          out += "," + fmt_double(s(i, j).real()) + "," + fmt_double(s(i, j).imag());
      out += "\n";
    }
    return out;
  }

  if (command == "freq-sweep") {
    const Json& points = doc.at("payload").at("points");
    if (points.empty()) throw ConfigError("record", "no points to tabulate");
    const Matrix first = matrix_from_json(points.at(0).at("rho"), "record.rho");
    out = "re_z,im_z,condition";
    for (Index i = 0; i < first.rows(); ++i)
      for (Index j = 0; j < first.cols(); ++j) {
        const std::string tag = std::to_string(i) + std::to_string(j);
        out += ",rho_" + tag + "_re,rho_" + tag + "_im";
      }
    out += "\n";
    for (const Json& pt : points) {
      const Complex z = complex_from_json(pt.at("z"), "record.z");
      const Matrix s = matrix_from_json(pt.at("rho"), "record.rho");
      out += fmt_double(z.real()) + "," + fmt_double(z.imag()) + "," +
             fmt_double(pt.at("condition").get<double>());
      for (Index i = 0; i < s.rows(); ++i)
        for (Index j = 0; j < s.cols(); ++j)
          out += "," + fmt_double(s(i, j).real()) + "," + fmt_double(s(i, j).imag());
      out += "\n";
    }
    return out;
  }

  throw ConfigError("format", "table output supports verify, evolve and freq-sweep records");
}

}  // namespace memliou
