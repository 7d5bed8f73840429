#include "wsp/phaseless.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wsp/parallel.hpp"
#include "wsp/rng.hpp"

namespace wsp {

PhaselessObservation::PhaselessObservation(Vector magnitudes, double noise_radius)
    : y(std::move(magnitudes)), eps(noise_radius) {
  if (!y.allFinite())
    throw std::invalid_argument("PhaselessObservation: magnitudes must be finite");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] < 0)
      throw std::invalid_argument("PhaselessObservation: magnitude " +
                                  std::to_string(i) + " is negative");
  if (eps < 0 || !std::isfinite(eps))
    throw std::invalid_argument("PhaselessObservation: eps must be >= 0");
}

const char* to_string(PhaselessStatus s) {
  switch (s) {
    case PhaselessStatus::ExactEnumeration: return "ExactEnumeration";
    case PhaselessStatus::Heuristic: return "Heuristic";
  }
  return "Unknown";
}

namespace {

bool same_class(const Signal& a, const Signal& b, double dedup_tol) {
  const double d = std::min((a - b).norm(), (a + b).norm());
  return d <= dedup_tol * (1.0 + a.norm());
}

void append_class(std::vector<Signal>& classes, const Signal& x, double dedup_tol) {
  const Signal canon = normalize_global_sign(x);
  for (const Signal& c : classes)
    if (same_class(canon, c, dedup_tol)) return;
  classes.push_back(canon);
}

} // namespace

PhaselessSolveReport solve_phaseless_exact(const MeasurementEnsemble& ensemble,
                                           const PhaselessObservation& obs,
                                           const WeightVector& w, const SolverConfig& cfg,
                                           const PhaselessOptions& opt) {
  const int m = ensemble.m();
  if (obs.y.size() != m)
    throw std::invalid_argument("solve_phaseless_exact: observation length != rows");
  if (m > opt.pattern_cap)
    throw CapExceeded("solve_phaseless_exact: m = " + std::to_string(m) +
                          " exceeds the pattern cap " + std::to_string(opt.pattern_cap) +
                          " (2^" + std::to_string(m - 1) + " canonical patterns)",
                      std::pow(2.0, m - 1));

  // Coordinates with (numerically) zero magnitude constrain both signs the
  // same way; fix them to +1. The first remaining coordinate is pinned to +1
  // as the global-sign quotient.
  const double zero_tol = opt.zero_tol < 0 ? default_zero_tol(obs.y) : opt.zero_tol;
  std::vector<int> vary;
  for (int j = 0; j < m; ++j)
    if (obs.y[j] > zero_tol) vary.push_back(j);
  if (!vary.empty()) vary.erase(vary.begin()); // anchor carries +1

  const std::int64_t patterns = std::int64_t{1} << vary.size();
  WeightedBasisPursuit solver(ensemble, w, cfg);

  struct Cell {
    bool optimal = false;
    bool failed = false;
    double objective = std::numeric_limits<double>::infinity();
    Vector x;
    SolveStatus status = SolveStatus::Infeasible;
  };
  std::vector<Cell> cells(static_cast<std::size_t>(patterns));

  parallel_for(static_cast<std::size_t>(patterns), [&](std::size_t id) {
    Vector b = obs.y;
    for (std::size_t j = 0; j < vary.size(); ++j)
      if (id & (std::size_t{1} << j)) b[vary[j]] = -b[vary[j]];
    const ConvexSolveReport rep =
        obs.eps == 0 ? solver.solve_eq(b) : solver.solve_denoise(b, obs.eps);
    Cell& cell = cells[id];
    cell.status = rep.status;
    if (rep.status == SolveStatus::Optimal) {
      cell.optimal = true;
      cell.objective = rep.objective;
      cell.x = rep.x;
    } else if (rep.status != SolveStatus::Infeasible) {
      cell.failed = true;
    }
  });

  PhaselessSolveReport out;
  out.status = PhaselessStatus::ExactEnumeration;
  out.patterns_tried = patterns;

  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t id = 0; id < patterns; ++id) {
    const Cell& cell = cells[static_cast<std::size_t>(id)];
    if (cell.failed)
      throw std::runtime_error("solve_phaseless_exact: inner solver failed on pattern " +
                               std::to_string(id) + " (" + to_string(cell.status) + ")");
    if (cell.optimal) {
      ++out.patterns_feasible;
      best = std::min(best, cell.objective);
    }
  }
  if (out.patterns_feasible == 0)
    throw AllPatternsInfeasible(
        "solve_phaseless_exact: no sign pattern admits a solution within eps = " +
        std::to_string(obs.eps));

  // Every pattern whose optimum ties the best (within opt_tol) contributes;
  // ties across patterns are exactly how non-uniqueness shows up.
  const double tie = cfg.opt_tol * (1.0 + std::abs(best));
  for (std::int64_t id = 0; id < patterns; ++id) {
    const Cell& cell = cells[static_cast<std::size_t>(id)];
    if (cell.optimal && cell.objective <= best + tie)
      append_class(out.solutions, cell.x, opt.dedup_tol);
  }
  out.objective = best;
  return out;
}

Signal altmin_default_init(const MeasurementEnsemble& ensemble,
                           const PhaselessObservation& obs) {
  if (obs.y.size() != ensemble.m())
    throw std::invalid_argument("altmin_default_init: observation length != rows");
  return ensemble.A.completeOrthogonalDecomposition().solve(obs.y);
}

PhaselessSolveReport solve_phaseless_altmin(const MeasurementEnsemble& ensemble,
                                            const PhaselessObservation& obs,
                                            const WeightVector& w, const Signal& init,
                                            int iters, const SolverConfig& cfg) {
  const int m = ensemble.m();
  if (obs.y.size() != m)
    throw std::invalid_argument("solve_phaseless_altmin: observation length != rows");
  if (init.size() != ensemble.n())
    throw std::invalid_argument("solve_phaseless_altmin: init length != columns");
  if (iters < 1) throw std::invalid_argument("solve_phaseless_altmin: iters must be >= 1");

  WeightedBasisPursuit solver(ensemble, w, cfg);
  Signal x = init;
  std::vector<std::int8_t> sign_prev;
  double prev_obj = std::numeric_limits<double>::infinity();

  PhaselessSolveReport out;
  out.status = PhaselessStatus::Heuristic;

  for (int t = 1; t <= iters; ++t) {
    const Vector ax = ensemble.A * x;
    std::vector<std::int8_t> sign(m);
    for (int j = 0; j < m; ++j) sign[j] = ax[j] < 0 ? -1 : 1; // zero maps to +1
    if (t > 1 && sign == sign_prev) break; // sign fixed point
    sign_prev = sign;

    Vector b(m);
    for (int j = 0; j < m; ++j) b[j] = sign[j] * obs.y[j];
    const ConvexSolveReport rep = solver.solve_denoise(b, obs.eps);
    ++out.patterns_tried;
    if (rep.status != SolveStatus::Optimal)
      throw std::runtime_error("solve_phaseless_altmin: inner solve at iteration " +
                               std::to_string(t) + " returned " + to_string(rep.status));
    ++out.patterns_feasible;
    // Flipping signs toward Ax can only shrink the residual, so x stays
    // feasible for the new pattern and the optimum cannot go up.
    if (rep.objective > prev_obj + cfg.opt_tol * (1.0 + std::abs(prev_obj)))
      throw std::logic_error("solve_phaseless_altmin: objective increased at iteration " +
                             std::to_string(t));
    prev_obj = rep.objective;
    x = rep.x;
    out.iterations = t;
  }

  out.solutions.push_back(normalize_global_sign(x));
  out.objective = weighted_l1(x, w);
  return out;
}

PhaselessSolveReport solve_phaseless_altmin(const MeasurementEnsemble& ensemble,
                                            const PhaselessObservation& obs,
                                            const WeightVector& w, std::uint64_t seed,
                                            int iters, const SolverConfig& cfg) {
  Rng rng(seed);
  Signal init(ensemble.n());
  for (int i = 0; i < ensemble.n(); ++i) init[i] = rng.normal();
  return solve_phaseless_altmin(ensemble, obs, w, init, iters, cfg);
}

bool verify_unique_recovery(const MeasurementEnsemble& ensemble, const Signal& x0,
                            const WeightVector& w, double tol, const SolverConfig& cfg,
                            const PhaselessOptions& opt) {
  if (x0.size() != ensemble.n())
    throw std::invalid_argument("verify_unique_recovery: signal length != columns");
  if (x0.norm() == 0.0)
    throw std::invalid_argument("verify_unique_recovery: x0 must be nonzero");

  const PhaselessObservation obs((ensemble.A * x0).cwiseAbs(), 0.0);
  const PhaselessSolveReport rep = solve_phaseless_exact(ensemble, obs, w, cfg, opt);

  const double obj0 = weighted_l1(x0, w);
  if (std::abs(rep.objective - obj0) > tol * (1.0 + obj0)) return false;
  for (const Signal& sol : rep.solutions)
    if (global_sign_error(sol, x0) > tol * (1.0 + x0.norm())) return false;
  return !rep.solutions.empty();
}

} // namespace wsp
