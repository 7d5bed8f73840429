#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>

#include "wsp/weights.hpp"

namespace wsp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct EnsembleMeta {
  std::string generator = "unspecified";
  std::uint64_t seed = 0;
  std::string normalization = "none";
};

/// m x N real measurement matrix with provenance metadata.
struct MeasurementEnsemble {
  Matrix A;
  EnsembleMeta meta;

  MeasurementEnsemble() = default;
  explicit MeasurementEnsemble(Matrix a, EnsembleMeta m = {});

  int m() const { return static_cast<int>(A.rows()); }
  int n() const { return static_cast<int>(A.cols()); }
};

enum class SolveStatus { Optimal, Infeasible, MaxIters, NumericalFailure };
const char* to_string(SolveStatus s);

struct SolverConfig {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  int max_iters = 50000;
  double penalty = 1.0; // ADMM coupling parameter
  bool adaptive_penalty = true;
};

struct ConvexSolveReport {
  Vector x;
  double objective = 0.0; // always weighted_l1(x, w)
  double feasibility_residual = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double duality_gap_estimate = 0.0;
};

/// Proximal map of lambda * ||.||_{w,1}: sign(v_i) * max(|v_i| - lambda w_i, 0).
Vector weighted_soft_threshold(const Vector& v, const WeightVector& w, double lambda);

/// Euclidean projection onto {z : ||z - center||_2 <= eps}.
Vector project_l2_ball(const Vector& r, const Vector& center, double eps);

/// Operator-splitting solver bound to one (A, w) pair. Factors A once so
/// many right-hand sides can be solved cheaply (the phaseless sign sweep
/// calls solve_eq in a loop). const member calls are thread-safe.
class WeightedBasisPursuit {
public:
  WeightedBasisPursuit(const MeasurementEnsemble& ensemble, const WeightVector& w,
                       SolverConfig cfg = {});
  ~WeightedBasisPursuit();
  WeightedBasisPursuit(WeightedBasisPursuit&&) noexcept;
  WeightedBasisPursuit& operator=(WeightedBasisPursuit&&) noexcept;

  /// min ||x||_{w,1} subject to Ax = b.
  ConvexSolveReport solve_eq(const Vector& b) const;

  /// min ||x||_{w,1} subject to ||Ax - b||_2 <= eps; eps = 0 delegates to
  /// solve_eq.
  ConvexSolveReport solve_denoise(const Vector& b, double eps) const;

  /// min_x ||Ax - b||_2 (distance from b to range(A)); the infeasibility test.
  double range_distance(const Vector& b) const;

  const SolverConfig& config() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ConvexSolveReport solve_wbp_eq(const MeasurementEnsemble& ensemble, const Vector& b,
                               const WeightVector& w, const SolverConfig& cfg = {});
ConvexSolveReport solve_wbp_denoise(const MeasurementEnsemble& ensemble, const Vector& b,
                                    const WeightVector& w, double eps,
                                    const SolverConfig& cfg = {});

/// Dense two-phase simplex (Bland pivoting) on the LP
///   min sum_i w_i t_i  s.t.  Ax = b, -t <= x <= t,
/// written in the split form x = p - q, p, q >= 0. Reference oracle for
/// solve_wbp_eq; limited to m, N <= cap (default 16).
ConvexSolveReport lp_reference_solve(const MeasurementEnsemble& ensemble, const Vector& b,
                                     const WeightVector& w, int cap = 16);

} // namespace wsp
