#include "wsp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "wsp/parallel.hpp"
#include "wsp/records.hpp"
#include "wsp/rng.hpp"

namespace wsp {

MeasurementEnsemble gen_gaussian_matrix(int m, int n, std::uint64_t seed,
                                        double variance) {
  if (m < 1 || n < 1)
    throw std::invalid_argument("gen_gaussian_matrix: m and N must be >= 1");
  const double var = variance < 0 ? 1.0 / static_cast<double>(m) : variance;
  const double sd = std::sqrt(var);
  Rng rng(seed);
  Matrix a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = sd * rng.normal();
  EnsembleMeta meta;
  meta.generator = "gaussian";
  meta.seed = seed;
  meta.normalization = "variance=" + std::to_string(var);
  return MeasurementEnsemble(std::move(a), std::move(meta));
}

MeasurementEnsemble gen_orthonormal_matrix(int m, int n, std::uint64_t seed) {
  if (m < n) throw std::invalid_argument("gen_orthonormal_matrix: need m >= n");
  const MeasurementEnsemble g = gen_gaussian_matrix(m, n, seed, 1.0);
  Eigen::HouseholderQR<Matrix> qr(g.A);
  Matrix q = qr.householderQ() * Matrix::Identity(m, n);
  const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  EnsembleMeta meta;
  meta.generator = "orthonormal-qr";
  meta.seed = seed;
  meta.normalization = "unit-columns";
  return MeasurementEnsemble(std::move(q), std::move(meta));
}

MeasurementEnsemble gen_ones_column_matrix(int m, double c) {
  if (m < 1) throw std::invalid_argument("gen_ones_column_matrix: m must be >= 1");
  if (!std::isfinite(c)) throw std::invalid_argument("gen_ones_column_matrix: bad c");
  EnsembleMeta meta;
  meta.generator = "ones-column";
  meta.normalization = "c=" + std::to_string(c);
  return MeasurementEnsemble(Matrix::Constant(m, 1, c), std::move(meta));
}

Signal gen_weighted_sparse_signal(const WeightVector& w, double k, std::uint64_t seed,
                                  const MagnitudeModel& mags, int cap) {
  if (mags.lo <= 0 || mags.hi < mags.lo)
    throw std::invalid_argument("gen_weighted_sparse_signal: bad magnitude range");
  std::vector<SupportSet> supports =
      enumerate_weighted_supports(w, k, /*maximal_only=*/true, cap);
  std::erase_if(supports, [](const SupportSet& s) { return s.indices.empty(); });
  if (supports.empty())
    throw std::invalid_argument(
        "gen_weighted_sparse_signal: no nonempty support satisfies w(S) <= k");
  Rng rng(seed);
  const SupportSet& s = supports[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(supports.size()) - 1))];
  Signal x = Signal::Zero(w.size());
  for (int i : s.indices) x[i] = rng.sign() * rng.uniform(mags.lo, mags.hi);
  return x;
}

Signal gen_compressible_signal(int n, std::uint64_t seed, double decay) {
  if (n < 1) throw std::invalid_argument("gen_compressible_signal: n must be >= 1");
  if (decay <= 0) throw std::invalid_argument("gen_compressible_signal: decay must be > 0");
  Rng rng(seed);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_int(0, i)]);
  Signal x(n);
  for (int j = 0; j < n; ++j)
    x[perm[j]] = rng.sign() * std::pow(static_cast<double>(j + 1), -decay);
  return x;
}

Vector gen_noise_in_ball(int m, double eps, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("gen_noise_in_ball: m must be >= 1");
  if (eps < 0) throw std::invalid_argument("gen_noise_in_ball: eps must be >= 0");
  Vector e = Vector::Zero(m);
  if (eps == 0) return e;
  Rng rng(seed);
  for (int i = 0; i < m; ++i) e[i] = rng.normal();
  const double dn = e.norm();
  if (dn == 0) return Vector::Zero(m);
  const double radius =
      eps * std::pow(rng.uniform01(), 1.0 / static_cast<double>(m));
  e *= radius / dn;
  if (e.norm() > eps) e *= eps / e.norm(); // projection, then the contract check
  if (e.norm() > eps)
    throw std::logic_error("gen_noise_in_ball: noise escaped the ball");
  return e;
}

WeightVector WeightSpec::build(int n) const {
  switch (profile) {
    case WeightProfile::Uniform:
      return WeightVector::uniform(n, c);
    case WeightProfile::TwoLevel: {
      if (split < 0 || split > n)
        throw std::invalid_argument("WeightSpec: split out of range");
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w[i] = i < split ? w_lo : w_hi;
      return WeightVector(std::move(w));
    }
    case WeightProfile::Explicit: {
      if (static_cast<int>(values.size()) != n)
        throw std::invalid_argument("WeightSpec: explicit weights must have length N");
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w[i] = values[i];
      return WeightVector(std::move(w));
    }
  }
  throw std::invalid_argument("WeightSpec: unknown profile");
}

namespace {

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.m < 1 || cfg.n < 1)
    throw std::invalid_argument("ExperimentConfig: m and N must be >= 1");
  if (!(cfg.k > 0)) throw std::invalid_argument("ExperimentConfig: k must be > 0");
  if (cfg.trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
  if (cfg.noise_eps < 0) throw std::invalid_argument("ExperimentConfig: noise_eps < 0");
  if (cfg.matrix_family == MatrixFamily::OnesColumn && cfg.n != 1)
    throw std::invalid_argument("ExperimentConfig: ones-column family requires N = 1");
  if (cfg.magnitude_lo <= 0 || cfg.magnitude_hi < cfg.magnitude_lo)
    throw std::invalid_argument("ExperimentConfig: bad magnitude range");
  for (int mg : cfg.m_grid)
    if (mg < 1) throw std::invalid_argument("ExperimentConfig: grid m < 1");
  for (double kg : cfg.k_grid)
    if (!(kg > 0)) throw std::invalid_argument("ExperimentConfig: grid k <= 0");
}

MeasurementEnsemble build_matrix(const ExperimentConfig& cfg, std::uint64_t seed) {
  switch (cfg.matrix_family) {
    case MatrixFamily::Gaussian:
      return gen_gaussian_matrix(cfg.m, cfg.n, seed, cfg.matrix_param);
    case MatrixFamily::Orthonormal:
      return gen_orthonormal_matrix(cfg.m, cfg.n, seed);
    case MatrixFamily::OnesColumn:
      return gen_ones_column_matrix(cfg.m, cfg.matrix_param);
  }
  throw std::invalid_argument("ExperimentConfig: unknown matrix family");
}

Signal build_signal(const ExperimentConfig& cfg, const WeightVector& w_signal,
                    std::uint64_t seed) {
  switch (cfg.signal_family) {
    case SignalFamily::ExactSparse:
      return gen_weighted_sparse_signal(w_signal, cfg.k, seed,
                                        {cfg.magnitude_lo, cfg.magnitude_hi},
                                        cfg.caps.enumeration);
    case SignalFamily::Compressible:
      return gen_compressible_signal(cfg.n, seed, cfg.decay);
  }
  throw std::invalid_argument("ExperimentConfig: unknown signal family");
}

} // namespace

TrialRecord run_recovery_trial(const ExperimentConfig& cfg, std::int64_t trial_id) {
  validate_config(cfg);
  TrialRecord rec;
  rec.trial_id = trial_id;
  rec.seed_derived = mix_seed(cfg.seed, static_cast<std::uint64_t>(trial_id));
  const auto t0 = std::chrono::steady_clock::now();

  try {
    const std::uint64_t matrix_seed = mix_seed(rec.seed_derived, 1);
    const std::uint64_t signal_seed = mix_seed(rec.seed_derived, 2);
    const std::uint64_t noise_seed = mix_seed(rec.seed_derived, 3);

    const MeasurementEnsemble ensemble = build_matrix(cfg, matrix_seed);
    const WeightVector w = cfg.weights.build(cfg.n);
    const WeightVector w_signal =
        cfg.signal_weights ? cfg.signal_weights->build(cfg.n) : w;
    const Signal x0 = build_signal(cfg, w_signal, signal_seed);
    const Vector noise = gen_noise_in_ball(cfg.m, cfg.noise_eps, noise_seed);
    const double solve_eps = cfg.effective_solve_eps();

    Signal xhat;
    if (cfg.model == MeasurementModel::Phaseless) {
      // magnitudes stay nonnegative; clipping cannot grow the noise
      const Vector y = ((ensemble.A * x0).cwiseAbs() + noise).cwiseMax(0.0);
      const PhaselessObservation obs(y, solve_eps);
      PhaselessOptions opt;
      opt.pattern_cap = cfg.caps.pattern;
      PhaselessSolveReport rep;
      if (cfg.solver == SolverKind::Exact) {
        rep = solve_phaseless_exact(ensemble, obs, w, cfg.solver_cfg, opt);
      } else {
        rep = solve_phaseless_altmin(ensemble, obs, w, altmin_default_init(ensemble, obs),
                                     cfg.altmin_iters, cfg.solver_cfg);
      }
      xhat = rep.solutions.front();
      rec.objective = rep.objective;
      rec.error = global_sign_error(xhat, x0);
    } else {
      const Vector y = ensemble.A * x0 + noise;
      const ConvexSolveReport rep =
          solve_wbp_denoise(ensemble, y, w, solve_eps, cfg.solver_cfg);
      if (rep.status != SolveStatus::Optimal)
        throw std::runtime_error(std::string("linear solve: ") + to_string(rep.status));
      xhat = rep.x;
      rec.objective = rep.objective;
      rec.error = (xhat - x0).norm();
    }
    rec.success = rec.error <= cfg.success_tol * x0.norm();

    if (cfg.certify) {
      const double sigma = best_weighted_k_term(x0, w, cfg.k).sigma;
      const double eps_bound = std::max(cfg.noise_eps, solve_eps);
      const double wmax = w.max_weight();
      CertifyCaps caps{cfg.caps.enumeration, cfg.caps.row_subset};
      bool pass = false;
      double delta = 0.0;
      if (cfg.model == MeasurementModel::Phaseless) {
        const auto [tm, tp] = swrip_bounds(ensemble, w, 2.0 * cfg.k, caps);
        pass = check_swrip_hypothesis(tm, tp) && cfg.k >= 2.0 * wmax * wmax;
        if (pass) delta = swrip_to_wrip_delta(tm, tp);
      } else {
        delta = wrip_constant(ensemble, w, 2.0 * cfg.k, caps.support_cap);
        pass = check_wrip_hypothesis(delta, cfg.k, w);
      }
      rec.certificate_pass = pass;
      if (pass) {
        const auto [c1, c2] = stable_recovery_constants(delta);
        rec.bound_rhs = error_bound(eps_bound, sigma, cfg.k, c1, c2);
      }
    }
  } catch (const std::exception& e) {
    rec.solver_status = e.what();
    rec.success = false;
    rec.error = std::numeric_limits<double>::quiet_NaN();
  }

  rec.runtime_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return rec;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg) {
  validate_config(cfg);
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  parallel_for(records.size(), [&](std::size_t i) {
    records[i] = run_recovery_trial(cfg, static_cast<std::int64_t>(i));
  });
  return records;
}

std::vector<PhaseCell> phase_transition(const ExperimentConfig& cfg) {
  validate_config(cfg);
  std::vector<int> ms = cfg.m_grid.empty() ? std::vector<int>{cfg.m} : cfg.m_grid;
  std::vector<double> ks = cfg.k_grid.empty() ? std::vector<double>{cfg.k} : cfg.k_grid;

  std::vector<PhaseCell> cells;
  for (int m : ms) {
    for (double k : ks) {
      ExperimentConfig cell_cfg = cfg;
      cell_cfg.m = m;
      cell_cfg.k = k;
      cell_cfg.m_grid.clear();
      cell_cfg.k_grid.clear();
      const std::vector<TrialRecord> records = run_trials(cell_cfg);

      PhaseCell cell;
      cell.m = m;
      cell.k = k;
      cell.trials = cfg.trials;
      int finite = 0;
      for (const TrialRecord& r : records) {
        if (r.success) cell.success_rate += 1.0;
        if (std::isfinite(r.error)) {
          cell.mean_error += r.error;
          ++finite;
        }
        cell.mean_runtime_ms += r.runtime_ms;
      }
      cell.success_rate /= cfg.trials;
      cell.mean_error = finite > 0 ? cell.mean_error / finite : 0.0;
      cell.mean_runtime_ms /= cfg.trials;
      cells.push_back(cell);
    }
  }
  return cells;
}

BoundSummary bound_verification(const ExperimentConfig& cfg) {
  ExperimentConfig certified_cfg = cfg;
  certified_cfg.certify = true;
  const std::vector<TrialRecord> records = run_trials(certified_cfg);

  BoundSummary summary;
  summary.trials = static_cast<std::int64_t>(records.size());
  for (const TrialRecord& r : records) {
    if (r.solver_status != "ok") {
      ++summary.solver_errors;
      continue;
    }
    if (r.certificate_pass.value_or(false) && r.bound_rhs) {
      ++summary.certified;
      if (r.error > *r.bound_rhs + 1e-8) ++summary.violations;
    } else {
      ++summary.vacuous;
    }
  }
  return summary;
}

std::string trials_to_csv(const std::vector<TrialRecord>& records, bool emit_runtime) {
  std::string out;
  std::vector<std::string> header = {"trial_id",  "seed",             "success",
                                     "error",     "objective",        "bound_rhs",
                                     "certificate_pass", "solver_status"};
  if (emit_runtime) header.push_back("runtime_ms");
  out += csv_row(header);
  for (const TrialRecord& r : records) {
    std::vector<std::string> row = {
        std::to_string(r.trial_id),
        std::to_string(r.seed_derived),
        r.success ? "1" : "0",
        format_double(r.error),
        format_double(r.objective),
        r.bound_rhs ? format_double(*r.bound_rhs) : "",
        r.certificate_pass ? (*r.certificate_pass ? "1" : "0") : "",
        r.solver_status};
    if (emit_runtime) row.push_back(format_double(r.runtime_ms));
    out += csv_row(row);
  }
  return out;
}

std::string phase_table_to_csv(const std::vector<PhaseCell>& cells, bool emit_runtime) {
  std::string out;
  std::vector<std::string> header = {"m", "k", "trials", "success_rate", "mean_error"};
  if (emit_runtime) header.push_back("mean_runtime_ms");
  out += csv_row(header);
  for (const PhaseCell& c : cells) {
    std::vector<std::string> row = {std::to_string(c.m), format_double(c.k),
                                    std::to_string(c.trials), format_double(c.success_rate),
                                    format_double(c.mean_error)};
    if (emit_runtime) row.push_back(format_double(c.mean_runtime_ms));
    out += csv_row(row);
  }
  return out;
}

} // namespace wsp
