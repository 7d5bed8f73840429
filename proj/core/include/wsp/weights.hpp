#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "wsp/errors.hpp"

namespace wsp {

using Signal = Eigen::VectorXd;

inline constexpr int kDefaultEnumerationCap = 24;
inline constexpr int kMaxKnapsackDimension = 30;
inline constexpr double kDefaultDedupTol = 1e-6;

/// Per-index weights w with w_i >= 1 defining the weighted l0/l1 norms and
/// the weighted cardinality w(S) = sum_{i in S} w_i^2.
class WeightVector {
public:
  explicit WeightVector(Eigen::VectorXd w);
  static WeightVector uniform(int n, double c = 1.0);

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_[i]; }
  const Eigen::VectorXd& values() const { return w_; }
  double weight_sq(int i) const { return w_[i] * w_[i]; }
  double max_weight() const { return max_weight_; } // ||w||_inf

private:
  Eigen::VectorXd w_;
  double max_weight_;
};

/// Sorted set of indices in [0, N) with its weighted cardinality. The
/// cardinality is the ascending-index prefix sum of w_i^2, so recomputation
/// reproduces it bit for bit.
struct SupportSet {
  std::vector<int> indices;
  double weighted_card = 0.0;
};

double weighted_cardinality(const std::vector<int>& indices, const WeightVector& w);
SupportSet make_support(std::vector<int> indices, const WeightVector& w);

/// The definition of ||x||_{w,0} uses an exact |x_i| > 0 test; floating-point
/// callers should pass a tolerance instead. Relative default: 1e-9 * ||x||_inf.
double default_zero_tol(const Signal& x);

/// sum of w_i^2 over entries with |x_i| > zero_tol.
double weighted_l0(const Signal& x, const WeightVector& w, double zero_tol = 0.0);

/// sum of w_i |x_i|.
double weighted_l1(const Signal& x, const WeightVector& w);

/// true iff weighted_l0(x, w, zero_tol) <= k.
bool is_weighted_k_sparse(const Signal& x, const WeightVector& w, double k,
                          double zero_tol = 0.0);

/// min(||xhat - x0||_2, ||xhat + x0||_2): recovery error modulo global sign.
double global_sign_error(const Signal& xhat, const Signal& x0);

/// Canonical representative of {x, -x}: flips the sign so the first entry
/// whose magnitude exceeds zero_tol is positive. Vectors with no such entry
/// (in particular the zero vector) are returned unchanged. zero_tol < 0
/// selects the relative default.
Signal normalize_global_sign(const Signal& x, double zero_tol = -1.0);

/// Streams every support S with w(S) <= k exactly once (the empty set
/// included), in lexicographic order of the sorted index list; with
/// maximal_only, only inclusion-maximal such supports. Single consumer;
/// create one stream per worker. Throws CapExceeded when w.size() > cap.
class SupportStream {
public:
  SupportStream(const WeightVector& w, double k, bool maximal_only = false,
                int cap = kDefaultEnumerationCap);
  std::optional<SupportSet> next();

private:
  bool fits(int i) const;
  bool is_maximal() const;

  std::vector<double> wsq_;
  double k_;
  bool maximal_only_;
  int n_;
  bool started_ = false;
  bool done_ = false;
  std::vector<int> cur_;
  std::vector<double> prefix_; // prefix_[j] = w({cur_[0..j]})
};

std::vector<SupportSet> enumerate_weighted_supports(const WeightVector& w, double k,
                                                    bool maximal_only = false,
                                                    int cap = kDefaultEnumerationCap);

struct BestKTerm {
  SupportSet support; // kept indices; lexicographically smallest optimum
  double sigma = 0.0; // sigma_k(x)_{w,1} = ||x||_{w,1} - value(support)
};

/// Exact best weighted k-term approximation: the kept support S maximizes
/// sum_{i in S} w_i |x_i| subject to w(S) <= k (a 0/1 knapsack with value
/// w_i |x_i| and weight w_i^2), solved by branch and bound with a fractional
/// value bound. Among optimal supports the lexicographically smallest index
/// list wins. Requires x.size() <= kMaxKnapsackDimension.
BestKTerm best_weighted_k_term(const Signal& x, const WeightVector& w, double k);

/// Dynamic-programming route for weights whose squares are integral after
/// scaling by a caller-declared denominator: w_i^2 * denom must be within
/// 1e-9 of an integer. Same tie rule as the branch-and-bound path.
BestKTerm best_weighted_k_term_dp(const Signal& x, const WeightVector& w, double k,
                                  std::int64_t denom);

} // namespace wsp
