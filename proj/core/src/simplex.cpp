#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsp/convex.hpp"
#include "wsp/errors.hpp"

namespace wsp {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

// Dense tableau simplex with Bland's rule (anti-cycling, deterministic).
// Standard form: min c^T v, E v = rhs, v >= 0.
class Tableau {
public:
  Tableau(const Matrix& e, const Vector& rhs, const Vector& cost)
      : rows_(static_cast<int>(e.rows())), cols_(static_cast<int>(e.cols())) {
    // Columns: structural variables, then one artificial per row.
    t_ = Matrix::Zero(rows_ + 1, cols_ + rows_ + 1);
    t_.block(0, 0, rows_, cols_) = e;
    basis_.resize(rows_);
    for (int i = 0; i < rows_; ++i) {
      double b = rhs[i];
      if (b < 0) {
        t_.row(i) = -t_.row(i);
        b = -b;
      }
      t_(i, cols_ + i) = 1.0;
      t_(i, cols_ + rows_) = b;
      basis_[i] = cols_ + i;
    }
    cost_ = cost;
  }

  // Phase 1: minimize the sum of artificials. Returns the attained value.
  double phase1() {
    Vector c = Vector::Zero(cols_ + rows_);
    for (int i = 0; i < rows_; ++i) c[cols_ + i] = 1.0;
    price_out(c);
    iterate(c, /*allow_artificials=*/true);
    return objective_row_value();
  }

  // Phase 2 on the structural cost; artificials are barred from entering.
  bool phase2() {
    // Drive any artificial still basic (at zero) out of the basis.
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) continue;
      int pivot_col = -1;
      for (int j = 0; j < cols_; ++j) {
        if (std::abs(t_(i, j)) > kPivotTol) {
          pivot_col = j;
          break;
        }
      }
      if (pivot_col >= 0) pivot(i, pivot_col);
      // A row with no structural pivot is redundant; its artificial stays
      // basic at zero and never moves again.
    }
    Vector c = Vector::Zero(cols_ + rows_);
    c.head(cols_) = cost_;
    price_out(c);
    return iterate(c, /*allow_artificials=*/false);
  }

  Vector solution() const {
    Vector v = Vector::Zero(cols_);
    for (int i = 0; i < rows_; ++i)
      if (basis_[i] < cols_) v[basis_[i]] = t_(i, cols_ + rows_);
    return v;
  }

  int pivots() const { return pivots_; }

private:
  void price_out(const Vector& c) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(cols_ + rows_) = c.transpose();
    for (int i = 0; i < rows_; ++i) {
      const double cb = c[basis_[i]];
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
  }

  double objective_row_value() const { return -t_(rows_, cols_ + rows_); }

  void pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    for (int i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[row] = col;
    ++pivots_;
  }

  // Returns false when an unbounded ray is detected.
  bool iterate(const Vector& /*c*/, bool allow_artificials) {
    const int limit = allow_artificials ? cols_ + rows_ : cols_;
    for (;;) {
      // Bland: entering = smallest-index column with negative reduced cost.
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (t_(rows_, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      // Ratio test; ties by smallest basic index (Bland).
      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < rows_; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = t_(i, cols_ + rows_) / a;
        if (leave < 0 || ratio < best_ratio - kPivotTol ||
            (std::abs(ratio - best_ratio) <= kPivotTol && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  int rows_;
  int cols_;
  Matrix t_;
  Vector cost_;
  std::vector<int> basis_;
  int pivots_ = 0;
};

} // namespace

ConvexSolveReport lp_reference_solve(const MeasurementEnsemble& ensemble, const Vector& b,
                                     const WeightVector& w, int cap) {
  const int m = ensemble.m();
  const int n = ensemble.n();
  if (b.size() != m)
    throw std::invalid_argument("lp_reference_solve: right-hand side length != rows");
  if (w.size() != n)
    throw std::invalid_argument("lp_reference_solve: weight length != columns");
  if (m > cap || n > cap)
    throw CapExceeded("lp_reference_solve: oracle limited to m, N <= " +
                          std::to_string(cap),
                      static_cast<double>(m) * n);

  const double scale = b.norm();
  ConvexSolveReport rep;
  if (scale == 0.0) {
    rep.x = Vector::Zero(n);
    rep.objective = 0.0;
    rep.feasibility_residual = 0.0;
    rep.status = SolveStatus::Optimal;
    return rep;
  }

  // x = p - q with p, q >= 0; objective sum_i w_i (p_i + q_i).
  Matrix e(m, 2 * n);
  e.leftCols(n) = ensemble.A;
  e.rightCols(n) = -ensemble.A;
  Vector cost(2 * n);
  cost.head(n) = w.values();
  cost.tail(n) = w.values();

  Tableau tab(e, b / scale, cost);
  if (tab.phase1() > kFeasTol) {
    rep.x = Vector::Zero(n);
    rep.status = SolveStatus::Infeasible;
    rep.iterations = tab.pivots();
    rep.feasibility_residual = (ensemble.A * rep.x - b).norm();
    rep.objective = 0.0;
    return rep;
  }
  const bool bounded = tab.phase2();

  const Vector v = scale * tab.solution();
  rep.x = v.head(n) - v.tail(n);
  rep.objective = weighted_l1(rep.x, w);
  rep.feasibility_residual = (ensemble.A * rep.x - b).norm();
  rep.iterations = tab.pivots();
  // The objective is bounded below by zero, so an unbounded ray can only be
  // numerical breakage.
  rep.status = bounded ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
  return rep;
}

} // namespace wsp
