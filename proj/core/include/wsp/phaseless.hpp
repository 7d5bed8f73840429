#pragma once

#include <cstdint>
#include <vector>

#include "wsp/convex.hpp"

namespace wsp {

/// Magnitude observations y = |Ax0| + e with declared noise radius eps.
struct PhaselessObservation {
  Vector y;
  double eps = 0.0;

  PhaselessObservation() = default;
  PhaselessObservation(Vector magnitudes, double noise_radius);
};

/// Sign assignment for the m measurements. Canonical form pins the first
/// nonzero-magnitude coordinate to +1 (global-sign quotient); coordinates
/// whose magnitude is below zero_tol are fixed to +1 since both signs give
/// the same constraint.
struct SignPattern {
  std::vector<std::int8_t> s; // entries +1 / -1
};

enum class PhaselessStatus { ExactEnumeration, Heuristic };
const char* to_string(PhaselessStatus s);

struct PhaselessSolveReport {
  std::vector<Signal> solutions; // canonical global sign, deduplicated
  double objective = 0.0;
  std::int64_t patterns_tried = 0;
  std::int64_t patterns_feasible = 0;
  PhaselessStatus status = PhaselessStatus::ExactEnumeration;
  int iterations = 0; // alternating minimization only
};

struct PhaselessOptions {
  int pattern_cap = 16;    // max m for exact enumeration (2^(m-1) patterns)
  double dedup_tol = kDefaultDedupTol;
  double zero_tol = -1.0;  // <0: relative default on y
};

/// Exact solver for min ||x||_{w,1} s.t. || |Ax| - y ||_2 <= eps by
/// exhaustive enumeration of canonical sign patterns; each pattern is a
/// convex subproblem. Returns every global minimizer class modulo sign (all
/// patterns whose optimum lies within cfg.opt_tol of the best contribute).
/// Throws CapExceeded past the pattern cap and AllPatternsInfeasible when no
/// pattern admits a feasible point.
PhaselessSolveReport solve_phaseless_exact(const MeasurementEnsemble& ensemble,
                                           const PhaselessObservation& obs,
                                           const WeightVector& w,
                                           const SolverConfig& cfg = {},
                                           const PhaselessOptions& opt = {});

/// Alternating-minimization heuristic: s <- sign(Ax) (zeros map to +1),
/// x <- solve_wbp_denoise(A, s .* y, w, eps). The objective is nonincreasing
/// across iterations; stops at a sign fixed point or after `iters` rounds.
/// Inner solver failures propagate with the iteration index.
PhaselessSolveReport solve_phaseless_altmin(const MeasurementEnsemble& ensemble,
                                            const PhaselessObservation& obs,
                                            const WeightVector& w, const Signal& init,
                                            int iters, const SolverConfig& cfg = {});

/// Seeded variant: Gaussian random initialization.
PhaselessSolveReport solve_phaseless_altmin(const MeasurementEnsemble& ensemble,
                                            const PhaselessObservation& obs,
                                            const WeightVector& w, std::uint64_t seed,
                                            int iters, const SolverConfig& cfg = {});

/// Default initialization: least-squares solution for the all-+1 pattern.
Signal altmin_default_init(const MeasurementEnsemble& ensemble,
                           const PhaselessObservation& obs);

/// Noiseless uniqueness check: builds y = |Ax0|, runs the exact solver with
/// eps = 0, and returns true iff the solution set is exactly the class of
/// +-x0: every solution within tol * (1 + ||x0||_2) of +-x0 and the optimum
/// within tol * (1 + ||x0||_{w,1}) of ||x0||_{w,1}.
bool verify_unique_recovery(const MeasurementEnsemble& ensemble, const Signal& x0,
                            const WeightVector& w, double tol = 1e-6,
                            const SolverConfig& cfg = {},
                            const PhaselessOptions& opt = {});

} // namespace wsp
