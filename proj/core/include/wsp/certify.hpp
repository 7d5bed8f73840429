#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wsp/phaseless.hpp"

namespace wsp {

// 1/(2*sqrt(2)+1), the working constant of both recovery hypotheses.
double wrip_delta_threshold();

struct EnumerationCounts {
  std::int64_t supports = 0;
  std::int64_t row_subsets = 0;
};

struct CertifyCaps {
  int support_cap = kDefaultEnumerationCap; // max N for support enumeration
  int row_subset_cap = 14;                  // max m for row-subset enumeration
};

/// Tightest delta with (1-delta)||x||^2 <= ||Ax||^2 <= (1+delta)||x||^2 over
/// all weighted k-sparse x: max over inclusion-maximal supports S with
/// w(S) <= k of max(lambda_max(A_S^T A_S) - 1, 1 - lambda_min(A_S^T A_S)).
/// May exceed 1, which signals that the property fails outright. Returns 0
/// when no nonempty support fits (vacuous).
double wrip_constant(const MeasurementEnsemble& ensemble, const WeightVector& w,
                     double k, int cap = kDefaultEnumerationCap);

/// Tightest (theta_-, theta_+) with
///   theta_- ||x||^2 <= min_{|I| >= m/2} ||A_I x||^2   and
///   max_{|I| >= m/2} ||A_I x||^2 <= theta_+ ||x||^2
/// over weighted k-sparse x. Row-energy monotonicity reduces the enumeration:
/// theta_+ is attained at I = [1:m] and theta_- at |I| = ceil(m/2). Returns
/// (1, 1) when no nonempty support fits (vacuous).
std::pair<double, double> swrip_bounds(const MeasurementEnsemble& ensemble,
                                       const WeightVector& w, double k,
                                       const CertifyCaps& caps = {},
                                       EnumerationCounts* counts = nullptr);

/// delta < 1/(2*sqrt(2)+1) and k >= 2 ||w||_inf^2. delta must have been
/// computed at order 2k.
bool check_wrip_hypothesis(double delta, double k, const WeightVector& w);

/// theta_- in (1 - 1/(2*sqrt(2)+1), 1) and theta_+ in (1, 1 + 1/(2*sqrt(2)+1)),
/// both open intervals.
bool check_swrip_hypothesis(double theta_minus, double theta_plus);

/// (c1, c2) = (6 sqrt(1+delta) / (1 - (1+2 sqrt(2)) delta),
///             4 (1 + (sqrt(2)-1) delta) / (1 - (1+2 sqrt(2)) delta)).
/// Throws std::domain_error when delta >= 1/(1+2 sqrt(2)).
std::pair<double, double> stable_recovery_constants(double delta);

/// max(1 - theta_-, theta_+ - 1): the bound on the order-2k restricted
/// isometry constant of any row submatrix A_T with |T| >= m/2.
double swrip_to_wrip_delta(double theta_minus, double theta_plus);

/// c1 * eps + c2 * sigma_k / sqrt(k).
double error_bound(double eps, double sigma_k, double k, double c1, double c2);

/// Where c1/c2 in a CertificateReport came from.
enum class ConstantsSource { None, Swrip, Wrip };
const char* to_string(ConstantsSource s);

struct CertificateReport {
  double delta_w_k = 0.0;   // restricted isometry constant at order_k
  double theta_minus = 1.0; // strong bounds at order_k
  double theta_plus = 1.0;
  double order_k = 0.0;     // = 2k; the certified order
  bool wrip_hypothesis_pass = false;
  bool swrip_hypothesis_pass = false; // includes k >= 2 ||w||_inf^2
  double c1 = std::numeric_limits<double>::quiet_NaN();
  double c2 = std::numeric_limits<double>::quiet_NaN();
  ConstantsSource constants_source = ConstantsSource::None;
  EnumerationCounts enumeration_counts;
  // For even m the hypothesis window is unsatisfiable (theta_- <= theta_+/2
  // via the complementary-halves energy split); flagged, never guessed around.
  bool even_m_window_unsatisfiable = false;
};

/// Full certificate at order 2k for sparsity budget k.
CertificateReport certify(const MeasurementEnsemble& ensemble, const WeightVector& w,
                          double k, const CertifyCaps& caps = {});

/// Witness that the matrix fails the null-space uniqueness condition:
/// u in N(A_S) \ {0}, v in N(A_{S^c}) \ {0}, u+v weighted k-sparse, and
/// ||u+v||_{w,1} >= ||u-v||_{w,1} (ties already break uniqueness).
struct WnspCounterexample {
  std::vector<int> rows; // S as row indices into [0, m)
  Signal u;
  Signal v;
  double lhs = 0.0; // ||u+v||_{w,1}
  double rhs = 0.0; // ||u-v||_{w,1}
  double sparsity_witness = 0.0; // weighted l0 of u+v
  bool u_minus_v_zero = false;   // recorded edge case (valid iff u+v != 0)
};

struct SearchBudget {
  int directions = 64;   // random samples per (S, T) witness subspace
  int polish_rounds = 3; // per-orthant linear maximization passes
  std::uint64_t seed = 0;
  double witness_floor = 1e-6; // min ||u||, ||v|| relative to ||u+v||
};

struct WnspSearchStats {
  std::int64_t subspaces = 0;
  std::int64_t samples = 0;
  double best_margin = -std::numeric_limits<double>::infinity(); // max lhs-rhs seen
};

/// Falsification search over row subsets S and candidate supports T with
/// w(T) <= k. The witness set {(u, v) : A_S u = 0, A_{S^c} v = 0,
/// (u+v)_{T^c} = 0} is a linear subspace (null-space basis stacking);
/// within it the margin ||u+v||_{w,1} - ||u-v||_{w,1} is maximized by random
/// directions plus per-orthant linear maximization under ||u+v||_2 = 1.
/// Returns the first witness that survives validate_wnsp_counterexample, or
/// nullopt with search statistics. A returned witness soundly certifies the
/// failure; nullopt is NOT a proof that the property holds.
std::optional<WnspCounterexample> wnsp_falsify_real(const MeasurementEnsemble& ensemble,
                                                    const WeightVector& w, double k,
                                                    const SearchBudget& budget = {},
                                                    WnspSearchStats* stats = nullptr,
                                                    const CertifyCaps& caps = {});

/// Soundness gate: null-space residuals <= 1e-9, u+v weighted k-sparse,
/// lhs >= rhs - 1e-12, nondegenerate u and v, and the recovery replay
/// (x0 := u+v, xhat := u-v gives |A xhat| = |A x0| elementwise to 1e-8 with
/// ||xhat||_{w,1} <= ||x0||_{w,1} + 1e-9).
bool validate_wnsp_counterexample(const MeasurementEnsemble& ensemble,
                                  const WeightVector& w, double k,
                                  const WnspCounterexample& cex,
                                  std::string* why = nullptr);

} // namespace wsp
