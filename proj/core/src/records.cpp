#include "wsp/records.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "wsp/version.hpp"

namespace wsp {

using nlohmann::json;

FileParseError::FileParseError(const std::string& path, int line, const std::string& what)
    : std::runtime_error(path + (line > 0 ? ":" + std::to_string(line) : "") + ": " + what),
      path_(path),
      line_(line) {}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view token, const std::string& path, int line) {
  // trim spaces and an optional trailing '\r'
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t'))
    token.remove_prefix(1);
  while (!token.empty() &&
         (token.back() == ' ' || token.back() == '\t' || token.back() == '\r'))
    token.remove_suffix(1);
  double out = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw FileParseError(path, line,
                         "cannot parse decimal value '" + std::string(token) + "'");
  return out;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& arr) {
  Vector v(arr.size());
  Eigen::Index i = 0;
  for (const auto& x : arr) v[i++] = x.get<double>();
  return v;
}

json provenance_to_json(const Provenance& p) {
  json cfg = json::object();
  if (!p.config_echo.empty()) cfg = json::parse(p.config_echo);
  return json{{"seed", p.seed},
              {"config", cfg},
              {"tool_version",
               p.tool_version.empty() ? std::string(kToolName) + " " + kVersion
                                      : p.tool_version}};
}

std::string wrap_record(const char* kind, json payload, const Provenance& p) {
  const json doc{{"schema_version", kSchemaVersion},
                 {"kind", kind},
                 {"payload", std::move(payload)},
                 {"provenance", provenance_to_json(p)}};
  return doc.dump(2) + "\n";
}

json unwrap_record(const std::string& text, const char* expected_kind) {
  json doc = json::parse(text);
  if (!doc.contains("schema_version"))
    throw FileParseError("<record>", 0, "missing schema_version");
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind != expected_kind)
    throw FileParseError("<record>", 0,
                         "expected kind '" + std::string(expected_kind) + "', got '" +
                             kind + "'");
  return doc.at("payload");
}

double number_or_nan(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null())
    return std::numeric_limits<double>::quiet_NaN();
  return j.at(key).get<double>();
}

json nan_to_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

} // namespace

// ---- CSV ----

std::string vector_to_csv(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += format_double(v[i]);
    out += '\n';
  }
  return out;
}

Vector vector_from_csv(const std::string& text, const std::string& path) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ')) sv.remove_suffix(1);
    if (sv.empty()) continue;
    values.push_back(parse_double(sv, path, lineno));
  }
  if (values.empty()) throw FileParseError(path, 0, "no values found");
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

std::string matrix_to_csv(const Matrix& a) {
  std::string out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(a(i, j));
    }
    out += '\n';
  }
  return out;
}

Matrix matrix_from_csv(const std::string& text, const std::string& path) {
  std::vector<std::vector<double>> grid;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ')) sv.remove_suffix(1);
    if (sv.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = sv.find(',', start);
      const std::string_view token =
          comma == std::string_view::npos ? sv.substr(start) : sv.substr(start, comma - start);
      row.push_back(parse_double(token, path, lineno));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!grid.empty() && row.size() != grid.front().size())
      throw FileParseError(path, lineno,
                           "row has " + std::to_string(row.size()) + " values, expected " +
                               std::to_string(grid.front().size()));
    grid.push_back(std::move(row));
  }
  if (grid.empty()) throw FileParseError(path, 0, "no rows found");
  Matrix a(static_cast<Eigen::Index>(grid.size()),
           static_cast<Eigen::Index>(grid.front().size()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < grid.front().size(); ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = grid[i][j];
  return a;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") != std::string::npos) {
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    } else {
      out += f;
    }
  }
  out += '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileParseError(path, 0, "cannot open for writing");
  out << text;
  if (!out) throw FileParseError(path, 0, "write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileParseError(path, 0, "cannot open for reading");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_vector_csv(const std::string& path, const Vector& v) {
  write_text_file(path, vector_to_csv(v));
}
Vector read_vector_csv(const std::string& path) {
  return vector_from_csv(read_text_file(path), path);
}
void write_matrix_csv(const std::string& path, const Matrix& a) {
  write_text_file(path, matrix_to_csv(a));
}
Matrix read_matrix_csv(const std::string& path) {
  return matrix_from_csv(read_text_file(path), path);
}

// ---- JSON records ----

std::string record_kind(const std::string& text) {
  return json::parse(text).at("kind").get<std::string>();
}

std::string matrix_record(const MeasurementEnsemble& e, const Provenance& p) {
  json entries = json::array();
  for (int i = 0; i < e.m(); ++i) {
    json row = json::array();
    for (int j = 0; j < e.n(); ++j) row.push_back(e.A(i, j));
    entries.push_back(std::move(row));
  }
  json payload{{"rows", e.m()},
               {"cols", e.n()},
               {"entries", std::move(entries)},
               {"meta",
                {{"generator", e.meta.generator},
                 {"seed", e.meta.seed},
                 {"normalization", e.meta.normalization}}}};
  return wrap_record("matrix", std::move(payload), p);
}

MeasurementEnsemble matrix_from_record(const std::string& text) {
  const json payload = unwrap_record(text, "matrix");
  const int m = payload.at("rows").get<int>();
  const int n = payload.at("cols").get<int>();
  Matrix a(m, n);
  const json& entries = payload.at("entries");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = entries.at(i).at(j).get<double>();
  EnsembleMeta meta;
  const json& jm = payload.at("meta");
  meta.generator = jm.at("generator").get<std::string>();
  meta.seed = jm.at("seed").get<std::uint64_t>();
  meta.normalization = jm.at("normalization").get<std::string>();
  return MeasurementEnsemble(std::move(a), std::move(meta));
}

std::string signal_record(const Signal& x, const Provenance& p) {
  json payload{{"n", x.size()}, {"values", vector_to_json(x)}};
  return wrap_record("signal", std::move(payload), p);
}

Signal signal_from_record(const std::string& text) {
  const json payload = unwrap_record(text, "signal");
  return vector_from_json(payload.at("values"));
}

std::string observation_record(const PhaselessObservation& obs, const Provenance& p) {
  json payload{{"y", vector_to_json(obs.y)}, {"eps", obs.eps}};
  return wrap_record("observation", std::move(payload), p);
}

PhaselessObservation observation_from_record(const std::string& text) {
  const json payload = unwrap_record(text, "observation");
  return PhaselessObservation(vector_from_json(payload.at("y")),
                              payload.at("eps").get<double>());
}

std::string phaseless_report_record(const PhaselessSolveReport& r, const Provenance& p) {
  json sols = json::array();
  for (const Signal& s : r.solutions) sols.push_back(vector_to_json(s));
  json payload{{"solutions", std::move(sols)},
               {"objective", r.objective},
               {"patterns_tried", r.patterns_tried},
               {"patterns_feasible", r.patterns_feasible},
               {"status", to_string(r.status)},
               {"iterations", r.iterations}};
  return wrap_record("solve_report", std::move(payload), p);
}

PhaselessSolveReport phaseless_report_from_record(const std::string& text) {
  const json payload = unwrap_record(text, "solve_report");
  PhaselessSolveReport r;
  for (const auto& s : payload.at("solutions")) r.solutions.push_back(vector_from_json(s));
  r.objective = payload.at("objective").get<double>();
  r.patterns_tried = payload.at("patterns_tried").get<std::int64_t>();
  r.patterns_feasible = payload.at("patterns_feasible").get<std::int64_t>();
  r.status = payload.at("status").get<std::string>() == "Heuristic"
                 ? PhaselessStatus::Heuristic
                 : PhaselessStatus::ExactEnumeration;
  r.iterations = payload.at("iterations").get<int>();
  return r;
}

std::string certificate_record(const CertificateReport& r, const Provenance& p) {
  json notes = json::array();
  if (r.even_m_window_unsatisfiable)
    notes.push_back(
        "even m: the strong-isometry hypothesis window is unsatisfiable "
        "(theta_- <= theta_+/2 by the complementary-halves energy split)");
  json payload{{"delta_w_k", r.delta_w_k},
               {"theta_minus", r.theta_minus},
               {"theta_plus", r.theta_plus},
               {"order_k", r.order_k},
               {"wrip_hypothesis_pass", r.wrip_hypothesis_pass},
               {"swrip_hypothesis_pass", r.swrip_hypothesis_pass},
               {"c1", nan_to_null(r.c1)},
               {"c2", nan_to_null(r.c2)},
               {"constants_source", to_string(r.constants_source)},
               {"enumeration_counts",
                {{"supports", r.enumeration_counts.supports},
                 {"row_subsets", r.enumeration_counts.row_subsets}}},
               {"even_m_window_unsatisfiable", r.even_m_window_unsatisfiable},
               {"notes", std::move(notes)}};
  return wrap_record("certificate", std::move(payload), p);
}

CertificateReport certificate_from_record(const std::string& text) {
  const json payload = unwrap_record(text, "certificate");
  CertificateReport r;
  r.delta_w_k = payload.at("delta_w_k").get<double>();
  r.theta_minus = payload.at("theta_minus").get<double>();
  r.theta_plus = payload.at("theta_plus").get<double>();
  r.order_k = payload.at("order_k").get<double>();
  r.wrip_hypothesis_pass = payload.at("wrip_hypothesis_pass").get<bool>();
  r.swrip_hypothesis_pass = payload.at("swrip_hypothesis_pass").get<bool>();
  r.c1 = number_or_nan(payload, "c1");
  r.c2 = number_or_nan(payload, "c2");
  const std::string src = payload.at("constants_source").get<std::string>();
  r.constants_source = src == "swrip"  ? ConstantsSource::Swrip
                       : src == "wrip" ? ConstantsSource::Wrip
                                       : ConstantsSource::None;
  r.enumeration_counts.supports =
      payload.at("enumeration_counts").at("supports").get<std::int64_t>();
  r.enumeration_counts.row_subsets =
      payload.at("enumeration_counts").at("row_subsets").get<std::int64_t>();
  r.even_m_window_unsatisfiable = payload.at("even_m_window_unsatisfiable").get<bool>();
  return r;
}

namespace {

json stats_to_json(const WnspSearchStats& stats) {
  return json{{"subspaces", stats.subspaces},
              {"samples", stats.samples},
              {"best_margin", std::isfinite(stats.best_margin)
                                  ? json(stats.best_margin)
                                  : json(nullptr)}};
}

constexpr const char* kSConvention =
    "S ranges over row subsets of [1:m] with no weighted-cardinality "
    "constraint (the proof's convention)";

} // namespace

std::string counterexample_record(const WnspCounterexample& cex,
                                  const WnspSearchStats& stats, const Provenance& p) {
  json rows = json::array();
  for (int r : cex.rows) rows.push_back(r);
  json payload{{"found", true},
               {"rows", std::move(rows)},
               {"u", vector_to_json(cex.u)},
               {"v", vector_to_json(cex.v)},
               {"lhs", cex.lhs},
               {"rhs", cex.rhs},
               {"sparsity_witness", cex.sparsity_witness},
               {"u_minus_v_zero", cex.u_minus_v_zero},
               {"s_convention", kSConvention},
               {"stats", stats_to_json(stats)}};
  return wrap_record("counterexample", std::move(payload), p);
}

std::string wnsp_notfound_record(const WnspSearchStats& stats, const Provenance& p) {
  json payload{{"found", false},
               {"s_convention", kSConvention},
               {"stats", stats_to_json(stats)}};
  return wrap_record("counterexample", std::move(payload), p);
}

WnspCounterexample counterexample_from_record(const std::string& text) {
  const json payload = unwrap_record(text, "counterexample");
  if (!payload.at("found").get<bool>())
    throw FileParseError("<record>", 0, "record holds no counterexample (found=false)");
  WnspCounterexample cex;
  for (const auto& r : payload.at("rows")) cex.rows.push_back(r.get<int>());
  cex.u = vector_from_json(payload.at("u"));
  cex.v = vector_from_json(payload.at("v"));
  cex.lhs = payload.at("lhs").get<double>();
  cex.rhs = payload.at("rhs").get<double>();
  cex.sparsity_witness = payload.at("sparsity_witness").get<double>();
  cex.u_minus_v_zero = payload.at("u_minus_v_zero").get<bool>();
  return cex;
}

// ---- Experiment configs ----

namespace {

json weight_spec_to_json(const WeightSpec& w) {
  switch (w.profile) {
    case WeightProfile::Uniform:
      return json{{"profile", "uniform"}, {"c", w.c}};
    case WeightProfile::TwoLevel:
      return json{{"profile", "two_level"},
                  {"w_lo", w.w_lo},
                  {"w_hi", w.w_hi},
                  {"split", w.split}};
    case WeightProfile::Explicit:
      return json{{"profile", "explicit"}, {"values", w.values}};
  }
  return json::object();
}

WeightSpec weight_spec_from_json(const json& j, const std::string& path) {
  WeightSpec w;
  const std::string profile = j.at("profile").get<std::string>();
  if (profile == "uniform") {
    w.profile = WeightProfile::Uniform;
    w.c = j.value("c", 1.0);
  } else if (profile == "two_level") {
    w.profile = WeightProfile::TwoLevel;
    w.w_lo = j.value("w_lo", 1.0);
    w.w_hi = j.value("w_hi", 2.0);
    w.split = j.value("split", 0);
  } else if (profile == "explicit") {
    w.profile = WeightProfile::Explicit;
    w.values = j.at("values").get<std::vector<double>>();
  } else {
    throw FileParseError(path, 0, "unknown weight profile '" + profile + "'");
  }
  return w;
}

template <typename T>
T parse_enum(const json& j, const char* key, const std::string& path,
             std::initializer_list<std::pair<const char*, T>> mapping,
             T fallback) {
  if (!j.contains(key)) return fallback;
  const std::string v = j.at(key).get<std::string>();
  for (const auto& [name, value] : mapping)
    if (v == name) return value;
  throw FileParseError(path, 0, std::string("invalid value '") + v + "' for " + key);
}

} // namespace

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j{{"name", cfg.name},
         {"m", cfg.m},
         {"n", cfg.n},
         {"k", cfg.k},
         {"weights", weight_spec_to_json(cfg.weights)},
         {"matrix",
          {{"family", cfg.matrix_family == MatrixFamily::Gaussian      ? "gaussian"
                      : cfg.matrix_family == MatrixFamily::Orthonormal ? "orthonormal"
                                                                       : "ones_column"},
           {"param", cfg.matrix_param}}},
         {"signal",
          {{"family",
            cfg.signal_family == SignalFamily::ExactSparse ? "exact" : "compressible"},
           {"decay", cfg.decay},
           {"magnitude_lo", cfg.magnitude_lo},
           {"magnitude_hi", cfg.magnitude_hi}}},
         {"model", cfg.model == MeasurementModel::Phaseless ? "phaseless" : "linear"},
         {"noise_eps", cfg.noise_eps},
         {"solve_eps", cfg.solve_eps < 0 ? json(nullptr) : json(cfg.solve_eps)},
         {"trials", cfg.trials},
         {"seed", cfg.seed},
         {"solver", cfg.solver == SolverKind::Exact ? "exact" : "altmin"},
         {"altmin_iters", cfg.altmin_iters},
         {"certify", cfg.certify},
         {"success_tol", cfg.success_tol},
         {"caps",
          {{"enumeration", cfg.caps.enumeration},
           {"pattern", cfg.caps.pattern},
           {"row_subset", cfg.caps.row_subset}}},
         {"solver_config",
          {{"feas_tol", cfg.solver_cfg.feas_tol},
           {"opt_tol", cfg.solver_cfg.opt_tol},
           {"max_iters", cfg.solver_cfg.max_iters},
           {"penalty", cfg.solver_cfg.penalty},
           {"adaptive_penalty", cfg.solver_cfg.adaptive_penalty}}},
         {"emit_runtime", cfg.emit_runtime},
         {"m_grid", cfg.m_grid},
         {"k_grid", cfg.k_grid}};
  if (cfg.signal_weights) j["signal_weights"] = weight_spec_to_json(*cfg.signal_weights);
  return j.dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text,
                                             const std::string& path) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FileParseError(path, 0, e.what());
  }
  ExperimentConfig cfg;
  cfg.name = j.value("name", cfg.name);
  cfg.m = j.value("m", cfg.m);
  cfg.n = j.value("n", cfg.n);
  cfg.k = j.value("k", cfg.k);
  if (j.contains("weights")) cfg.weights = weight_spec_from_json(j.at("weights"), path);
  if (j.contains("signal_weights"))
    cfg.signal_weights = weight_spec_from_json(j.at("signal_weights"), path);
  if (j.contains("matrix")) {
    const json& jm = j.at("matrix");
    cfg.matrix_family = parse_enum<MatrixFamily>(
        jm, "family", path,
        {{"gaussian", MatrixFamily::Gaussian},
         {"orthonormal", MatrixFamily::Orthonormal},
         {"ones_column", MatrixFamily::OnesColumn}},
        MatrixFamily::Gaussian);
    cfg.matrix_param = jm.value("param", cfg.matrix_param);
  }
  if (j.contains("signal")) {
    const json& js = j.at("signal");
    cfg.signal_family = parse_enum<SignalFamily>(
        js, "family", path,
        {{"exact", SignalFamily::ExactSparse},
         {"compressible", SignalFamily::Compressible}},
        SignalFamily::ExactSparse);
    cfg.decay = js.value("decay", cfg.decay);
    cfg.magnitude_lo = js.value("magnitude_lo", cfg.magnitude_lo);
    cfg.magnitude_hi = js.value("magnitude_hi", cfg.magnitude_hi);
  }
  cfg.model = parse_enum<MeasurementModel>(
      j, "model", path,
      {{"phaseless", MeasurementModel::Phaseless}, {"linear", MeasurementModel::Linear}},
      MeasurementModel::Phaseless);
  cfg.noise_eps = j.value("noise_eps", cfg.noise_eps);
  if (j.contains("solve_eps") && !j.at("solve_eps").is_null())
    cfg.solve_eps = j.at("solve_eps").get<double>();
  cfg.trials = j.value("trials", cfg.trials);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.solver = parse_enum<SolverKind>(
      j, "solver", path, {{"exact", SolverKind::Exact}, {"altmin", SolverKind::AltMin}},
      SolverKind::Exact);
  cfg.altmin_iters = j.value("altmin_iters", cfg.altmin_iters);
  cfg.certify = j.value("certify", cfg.certify);
  cfg.success_tol = j.value("success_tol", cfg.success_tol);
  if (j.contains("caps")) {
    const json& jc = j.at("caps");
    cfg.caps.enumeration = jc.value("enumeration", cfg.caps.enumeration);
    cfg.caps.pattern = jc.value("pattern", cfg.caps.pattern);
    cfg.caps.row_subset = jc.value("row_subset", cfg.caps.row_subset);
  }
  if (j.contains("solver_config")) {
    const json& js = j.at("solver_config");
    cfg.solver_cfg.feas_tol = js.value("feas_tol", cfg.solver_cfg.feas_tol);
    cfg.solver_cfg.opt_tol = js.value("opt_tol", cfg.solver_cfg.opt_tol);
    cfg.solver_cfg.max_iters = js.value("max_iters", cfg.solver_cfg.max_iters);
    cfg.solver_cfg.penalty = js.value("penalty", cfg.solver_cfg.penalty);
    cfg.solver_cfg.adaptive_penalty =
        js.value("adaptive_penalty", cfg.solver_cfg.adaptive_penalty);
  }
  cfg.emit_runtime = j.value("emit_runtime", cfg.emit_runtime);
  if (j.contains("m_grid")) cfg.m_grid = j.at("m_grid").get<std::vector<int>>();
  if (j.contains("k_grid")) cfg.k_grid = j.at("k_grid").get<std::vector<double>>();
  return cfg;
}

std::string summary_record(const ExperimentSummary& s, const Provenance& p) {
  json payload{{"name", s.config.name},
               {"config", json::parse(experiment_config_to_json(s.config))},
               {"csv_path", s.csv_path},
               {"rows", s.rows},
               {"wall_clock_ms", s.wall_clock_ms}};
  if (s.bound) {
    payload["bound_verification"] = json{{"trials", s.bound->trials},
                                         {"certified", s.bound->certified},
                                         {"violations", s.bound->violations},
                                         {"vacuous", s.bound->vacuous},
                                         {"solver_errors", s.bound->solver_errors}};
  }
  return wrap_record("summary", std::move(payload), p);
}

} // namespace wsp
