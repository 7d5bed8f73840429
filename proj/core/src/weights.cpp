#include "wsp/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wsp {

namespace {

void check_same_size(const Signal& x, const WeightVector& w, const char* op) {
  if (x.size() != w.size())
    throw std::invalid_argument(std::string(op) + ": signal length " +
                                std::to_string(x.size()) + " != weight length " +
                                std::to_string(w.size()));
}

} // namespace

WeightVector::WeightVector(Eigen::VectorXd w) : w_(std::move(w)) {
  if (w_.size() < 1) throw std::invalid_argument("WeightVector: length must be >= 1");
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    if (!std::isfinite(w_[i]))
      throw std::invalid_argument("WeightVector: entry " + std::to_string(i) +
                                  " is not finite");
    if (w_[i] < 1.0)
      throw std::invalid_argument("WeightVector: entry " + std::to_string(i) + " = " +
                                  std::to_string(w_[i]) +
                                  " violates the requirement w_i >= 1");
  }
  max_weight_ = w_.maxCoeff();
}

WeightVector WeightVector::uniform(int n, double c) {
  return WeightVector(Eigen::VectorXd::Constant(n, c));
}

double weighted_cardinality(const std::vector<int>& indices, const WeightVector& w) {
  double card = 0.0;
  for (int i : indices) card += w.weight_sq(i);
  return card;
}

SupportSet make_support(std::vector<int> indices, const WeightVector& w) {
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
    throw std::invalid_argument("make_support: duplicate index");
  if (!indices.empty() && (indices.front() < 0 || indices.back() >= w.size()))
    throw std::invalid_argument("make_support: index out of bounds");
  SupportSet s;
  s.weighted_card = weighted_cardinality(indices, w);
  s.indices = std::move(indices);
  return s;
}

double default_zero_tol(const Signal& x) {
  return x.size() == 0 ? 0.0 : 1e-9 * x.cwiseAbs().maxCoeff();
}

double weighted_l0(const Signal& x, const WeightVector& w, double zero_tol) {
  check_same_size(x, w, "weighted_l0");
  if (zero_tol < 0) throw std::invalid_argument("weighted_l0: zero_tol must be >= 0");
  double out = 0.0;
  for (int i = 0; i < w.size(); ++i)
    if (std::abs(x[i]) > zero_tol) out += w.weight_sq(i);
  return out;
}

double weighted_l1(const Signal& x, const WeightVector& w) {
  check_same_size(x, w, "weighted_l1");
  double out = 0.0;
  for (int i = 0; i < w.size(); ++i) out += w[i] * std::abs(x[i]);
  return out;
}

bool is_weighted_k_sparse(const Signal& x, const WeightVector& w, double k,
                          double zero_tol) {
  return weighted_l0(x, w, zero_tol) <= k;
}

double global_sign_error(const Signal& xhat, const Signal& x0) {
  if (xhat.size() != x0.size())
    throw std::invalid_argument("global_sign_error: length mismatch");
  return std::min((xhat - x0).norm(), (xhat + x0).norm());
}

Signal normalize_global_sign(const Signal& x, double zero_tol) {
  const double tol = zero_tol < 0 ? default_zero_tol(x) : zero_tol;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > tol) return x[i] > 0 ? x : Signal(-x);
  }
  return x;
}

// ---- support enumeration ----

SupportStream::SupportStream(const WeightVector& w, double k, bool maximal_only, int cap)
    : k_(k), maximal_only_(maximal_only), n_(w.size()) {
  if (n_ > cap)
    throw CapExceeded("support enumeration: N = " + std::to_string(n_) +
                          " exceeds cap " + std::to_string(cap) + " (up to 2^" +
                          std::to_string(n_) + " = " +
                          std::to_string(std::pow(2.0, n_)) + " subsets)",
                      std::pow(2.0, n_));
  wsq_.resize(n_);
  for (int i = 0; i < n_; ++i) wsq_[i] = w.weight_sq(i);
}

bool SupportStream::fits(int i) const {
  const double card = prefix_.empty() ? 0.0 : prefix_.back();
  return card + wsq_[i] <= k_;
}

bool SupportStream::is_maximal() const {
  const double card = prefix_.empty() ? 0.0 : prefix_.back();
  std::size_t pos = 0;
  for (int i = 0; i < n_; ++i) {
    if (pos < cur_.size() && cur_[pos] == i) {
      ++pos;
      continue;
    }
    if (card + wsq_[i] <= k_) return false;
  }
  return true;
}

std::optional<SupportSet> SupportStream::next() {
  auto push = [this](int i) {
    prefix_.push_back((prefix_.empty() ? 0.0 : prefix_.back()) + wsq_[i]);
    cur_.push_back(i);
  };
  auto extend_from = [&](int start) {
    for (int i = start; i < n_; ++i) {
      if (fits(i)) {
        push(i);
        return true;
      }
    }
    return false;
  };

  while (!done_) {
    if (!started_) {
      started_ = true; // the empty set comes first
    } else {
      // Successor: extend past the last element, else backtrack and advance.
      bool advanced = extend_from(cur_.empty() ? 0 : cur_.back() + 1);
      while (!advanced) {
        if (cur_.empty()) {
          done_ = true;
          break;
        }
        const int last = cur_.back();
        cur_.pop_back();
        prefix_.pop_back();
        advanced = extend_from(last + 1);
      }
      if (done_) break;
    }
    if (!maximal_only_ || is_maximal()) {
      SupportSet s;
      s.indices = cur_;
      s.weighted_card = prefix_.empty() ? 0.0 : prefix_.back();
      return s;
    }
  }
  return std::nullopt;
}

std::vector<SupportSet> enumerate_weighted_supports(const WeightVector& w, double k,
                                                    bool maximal_only, int cap) {
  SupportStream stream(w, k, maximal_only, cap);
  std::vector<SupportSet> out;
  while (auto s = stream.next()) out.push_back(std::move(*s));
  return out;
}

// ---- best weighted k-term approximation (exact 0/1 knapsack) ----

namespace {

struct KnapsackState {
  const std::vector<double>* value;  // w_i |x_i|, by index
  const std::vector<double>* weight; // w_i^2, by index
  const std::vector<int>* density_order;
  double k;
  double best_value = -1.0;
  std::vector<int> best_support;
  std::vector<int> path;
  // slack keeps float rounding in the fractional bound from pruning an
  // exact optimum; only branches worse by more than this are cut.
  double prune_slack = 0.0;
};

// Fractional-knapsack upper bound for items with index >= i.
double upper_bound(const KnapsackState& st, int i, double used, double val) {
  double rem = st.k - used;
  double bound = val;
  for (int j : *st.density_order) {
    if (j < i) continue;
    const double g = (*st.weight)[j];
    const double v = (*st.value)[j];
    if (g <= rem) {
      bound += v;
      rem -= g;
    } else {
      if (rem > 0) bound += v * (rem / g);
      break;
    }
  }
  return bound;
}

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void consider(KnapsackState& st, double val) {
  if (val > st.best_value ||
      (val == st.best_value && lex_less(st.path, st.best_support))) {
    st.best_value = val;
    st.best_support = st.path;
  }
}

// DFS in index order; `used` is the ascending-index prefix sum of weights and
// `val` the matching prefix sum of values, so identical supports produce bit
// identical totals in every code path (including brute-force oracles that sum
// in ascending index order).
void search(KnapsackState& st, int i, double used, double val) {
  const int n = static_cast<int>(st.value->size());
  if (i == n) {
    consider(st, val);
    return;
  }
  if (upper_bound(st, i, used, val) < st.best_value - st.prune_slack) return;
  if (used + (*st.weight)[i] <= st.k) {
    st.path.push_back(i);
    search(st, i + 1, used + (*st.weight)[i], val + (*st.value)[i]);
    st.path.pop_back();
  }
  search(st, i + 1, used, val);
}

BestKTerm finish(const Signal& x, const WeightVector& w, std::vector<int> support,
                 double value) {
  BestKTerm out;
  out.support = make_support(std::move(support), w);
  out.sigma = weighted_l1(x, w) - value;
  if (out.sigma < 0 && out.sigma > -1e-12) out.sigma = 0.0;
  return out;
}

} // namespace

BestKTerm best_weighted_k_term(const Signal& x, const WeightVector& w, double k) {
  check_same_size(x, w, "best_weighted_k_term");
  if (!(k > 0)) throw std::invalid_argument("best_weighted_k_term: k must be > 0");
  const int n = w.size();
  if (n > kMaxKnapsackDimension)
    throw std::invalid_argument(
        "best_weighted_k_term: N > " + std::to_string(kMaxKnapsackDimension) +
        "; use best_weighted_k_term_dp for integral scaled weights");

  std::vector<double> value(n), weight(n);
  for (int i = 0; i < n; ++i) {
    value[i] = w[i] * std::abs(x[i]);
    weight[i] = w.weight_sq(i);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return value[a] * weight[b] > value[b] * weight[a]; // density, no division
  });

  KnapsackState st;
  st.value = &value;
  st.weight = &weight;
  st.density_order = &order;
  st.k = k;
  double scale = 0.0;
  for (double v : value) scale += v;
  st.prune_slack = 1e-12 * (1.0 + scale);

  search(st, 0, 0.0, 0.0);
  return finish(x, w, std::move(st.best_support), st.best_value);
}

BestKTerm best_weighted_k_term_dp(const Signal& x, const WeightVector& w, double k,
                                  std::int64_t denom) {
  check_same_size(x, w, "best_weighted_k_term_dp");
  if (!(k > 0)) throw std::invalid_argument("best_weighted_k_term_dp: k must be > 0");
  if (denom < 1) throw std::invalid_argument("best_weighted_k_term_dp: denom must be >= 1");
  const int n = w.size();

  std::vector<std::int64_t> weight(n);
  for (int i = 0; i < n; ++i) {
    const double scaled = w.weight_sq(i) * static_cast<double>(denom);
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > 1e-9)
      throw std::invalid_argument("best_weighted_k_term_dp: w[" + std::to_string(i) +
                                  "]^2 * denom is not integral");
    weight[i] = static_cast<std::int64_t>(rounded);
  }
  const auto capacity =
      static_cast<std::int64_t>(std::floor(k * static_cast<double>(denom) + 1e-9));
  if (capacity < 0) throw std::invalid_argument("best_weighted_k_term_dp: k too small");
  if (static_cast<double>(n + 1) * static_cast<double>(capacity + 1) > 5e7)
    throw std::invalid_argument("best_weighted_k_term_dp: DP table too large");

  std::vector<double> value(n);
  for (int i = 0; i < n; ++i) value[i] = w[i] * std::abs(x[i]);

  // suf[i][c]: best value over items i..n-1 with capacity c.
  const auto cols = static_cast<std::size_t>(capacity + 1);
  std::vector<std::vector<double>> suf(n + 1, std::vector<double>(cols, 0.0));
  for (int i = n - 1; i >= 0; --i) {
    for (std::int64_t c = 0; c <= capacity; ++c) {
      double best = suf[i + 1][c];
      if (weight[i] <= c) {
        const double with_i = value[i] + suf[i + 1][c - weight[i]];
        if (with_i > best) best = with_i;
      }
      suf[i][c] = best;
    }
  }

  // Reconstruct the lexicographically smallest optimal support: include item
  // i on a tie only when the exclude branch cannot finish with the empty set.
  std::vector<int> support;
  std::int64_t c = capacity;
  for (int i = 0; i < n; ++i) {
    const double opt = suf[i][c];
    const bool can_exclude = suf[i + 1][c] == opt;
    const bool can_include = weight[i] <= c && value[i] + suf[i + 1][c - weight[i]] == opt;
    if (can_include && (!can_exclude || suf[i + 1][c] > 0.0)) {
      support.push_back(i);
      c -= weight[i];
    }
  }

  double total = 0.0;
  for (int i : support) total += value[i];
  return finish(x, w, std::move(support), total);
}

} // namespace wsp
