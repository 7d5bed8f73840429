#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsp/certify.hpp"

namespace wsp {

/// i.i.d. N(0, variance) entries, row-major fill order; variance < 0 selects
/// the default 1/m. Deterministic for a given seed.
MeasurementEnsemble gen_gaussian_matrix(int m, int n, std::uint64_t seed,
                                        double variance = -1.0);

/// Thin Q factor of a seeded Gaussian matrix (m >= n), columns sign-fixed so
/// the factorization is deterministic. A^T A = I to machine precision.
MeasurementEnsemble gen_orthonormal_matrix(int m, int n, std::uint64_t seed);

/// The m x 1 matrix c * (1, ..., 1)^T; the hand-certifiable odd-m family.
MeasurementEnsemble gen_ones_column_matrix(int m, double c);

struct MagnitudeModel {
  double lo = 1.0;
  double hi = 2.0;
};

/// Weighted k-sparse signal: support drawn uniformly among inclusion-maximal
/// feasible supports, nonzero magnitudes uniform in [lo, hi] with random
/// signs. Throws std::invalid_argument when no nonempty support fits.
Signal gen_weighted_sparse_signal(const WeightVector& w, double k, std::uint64_t seed,
                                  const MagnitudeModel& mags = {},
                                  int cap = kDefaultEnumerationCap);

/// Compressible (not exactly sparse) signal: magnitudes (j+1)^(-decay) for
/// j = 0..n-1 scattered by a random permutation, random signs.
Signal gen_compressible_signal(int n, std::uint64_t seed, double decay);

/// Noise drawn uniformly from the closed l2 ball of radius eps; the result
/// always satisfies ||e||_2 <= eps exactly (projected, then asserted).
Vector gen_noise_in_ball(int m, double eps, std::uint64_t seed);

enum class WeightProfile { Uniform, TwoLevel, Explicit };

struct WeightSpec {
  WeightProfile profile = WeightProfile::Uniform;
  double c = 1.0;                     // uniform(c)
  double w_lo = 1.0, w_hi = 2.0;      // two_level: indices [0, split) get w_lo
  int split = 0;
  std::vector<double> values;         // explicit list

  WeightVector build(int n) const;
};

enum class MatrixFamily { Gaussian, Orthonormal, OnesColumn };
enum class SignalFamily { ExactSparse, Compressible };
enum class MeasurementModel { Phaseless, Linear };
enum class SolverKind { Exact, AltMin };

struct ExperimentCaps {
  int enumeration = kDefaultEnumerationCap;
  int pattern = 16;
  int row_subset = 14;
};

struct ExperimentConfig {
  std::string name = "experiment";
  int m = 8;
  int n = 6;
  double k = 2.0;
  WeightSpec weights;                       // solver weights
  std::optional<WeightSpec> signal_weights; // defaults to `weights`
  MatrixFamily matrix_family = MatrixFamily::Gaussian;
  double matrix_param = -1.0; // gaussian variance (<0 -> 1/m) or ones-column c
  SignalFamily signal_family = SignalFamily::ExactSparse;
  double decay = 1.5;
  double magnitude_lo = 1.0, magnitude_hi = 2.0;
  MeasurementModel model = MeasurementModel::Phaseless;
  double noise_eps = 0.0;  // radius of the generated noise
  double solve_eps = -1.0; // constraint radius; <0 -> equal to noise_eps
  int trials = 1;
  std::uint64_t seed = 0;
  SolverKind solver = SolverKind::Exact;
  int altmin_iters = 50;
  bool certify = false;
  double success_tol = 1e-4; // relative to ||x0||_2
  ExperimentCaps caps;
  SolverConfig solver_cfg;
  bool emit_runtime = false; // runtimes make CSV output nondeterministic
  std::vector<int> m_grid;   // phase-transition grid; empty -> {m}
  std::vector<double> k_grid; // empty -> {k}

  double effective_solve_eps() const { return solve_eps < 0 ? noise_eps : solve_eps; }
};

struct TrialRecord {
  std::int64_t trial_id = 0;
  std::uint64_t seed_derived = 0;
  bool success = false;
  double error = 0.0;
  double objective = 0.0;
  std::optional<double> bound_rhs;      // set iff certification ran and passed
  std::optional<bool> certificate_pass; // set iff certification ran
  double runtime_ms = 0.0;
  std::string solver_status = "ok"; // solver errors recorded, not thrown
};

/// One end-to-end recovery trial. The trial seed is
/// mix_seed(cfg.seed, trial_id); matrix/signal/noise streams fork from it.
/// Phaseless model: y = max(|Ax0| + e, 0), error modulo global sign.
/// Linear model: y = Ax0 + e, plain l2 error. With certification enabled the
/// report gains hypothesis flags and the stable-recovery bound evaluated at
/// eps = max(noise radius, constraint radius).
TrialRecord run_recovery_trial(const ExperimentConfig& cfg, std::int64_t trial_id);

/// All trials of the config, parallel over trial ids, ordered by trial_id.
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg);

struct PhaseCell {
  int m = 0;
  double k = 0.0;
  int trials = 0;
  double success_rate = 0.0;
  double mean_error = 0.0; // over trials with finite error
  double mean_runtime_ms = 0.0;
};

/// Success-rate table over the (m, k) grid. Trial seeds depend only on
/// (cfg.seed, trial_id), so cells and rival configs are paired.
std::vector<PhaseCell> phase_transition(const ExperimentConfig& cfg);

struct BoundSummary {
  std::int64_t trials = 0;
  std::int64_t certified = 0;   // hypothesis passed; bound applies
  std::int64_t violations = 0;  // error > bound_rhs + 1e-8 among certified
  std::int64_t vacuous = 0;     // hypothesis failed; bound says nothing
  std::int64_t solver_errors = 0;
};

/// Conditional verification of the stable-recovery bounds: among trials whose
/// hypothesis check passes, counts violations of error <= bound_rhs + 1e-8.
BoundSummary bound_verification(const ExperimentConfig& cfg);

/// CSV emission (RFC 4180). Deterministic given the inputs; runtime columns
/// appear only when emit_runtime is set.
std::string trials_to_csv(const std::vector<TrialRecord>& records, bool emit_runtime);
std::string phase_table_to_csv(const std::vector<PhaseCell>& cells, bool emit_runtime);

} // namespace wsp
