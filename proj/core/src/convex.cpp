#include "wsp/convex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wsp {

MeasurementEnsemble::MeasurementEnsemble(Matrix a, EnsembleMeta m)
    : A(std::move(a)), meta(std::move(m)) {
  if (A.rows() < 1 || A.cols() < 1)
    throw std::invalid_argument("MeasurementEnsemble: m and N must be >= 1");
  if (!A.allFinite())
    throw std::invalid_argument("MeasurementEnsemble: entries must be finite");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

Vector weighted_soft_threshold(const Vector& v, const WeightVector& w, double lambda) {
  if (v.size() != w.size())
    throw std::invalid_argument("weighted_soft_threshold: length mismatch");
  if (lambda < 0)
    throw std::invalid_argument("weighted_soft_threshold: lambda must be >= 0");
  Vector out(v.size());
  for (int i = 0; i < w.size(); ++i) {
    const double mag = std::abs(v[i]) - lambda * w[i];
    out[i] = mag > 0 ? (v[i] > 0 ? mag : -mag) : 0.0;
  }
  return out;
}

Vector project_l2_ball(const Vector& r, const Vector& center, double eps) {
  if (r.size() != center.size())
    throw std::invalid_argument("project_l2_ball: length mismatch");
  if (eps < 0) throw std::invalid_argument("project_l2_ball: eps must be >= 0");
  const double dist = (r - center).norm();
  if (dist <= eps) return r;
  if (dist == 0.0) return center;
  return center + (eps / dist) * (r - center);
}

struct WeightedBasisPursuit::Impl {
  Matrix A;
  WeightVector w;
  SolverConfig cfg;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;   // of A
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod_t; // of A^T (dual recovery)
  Eigen::LDLT<Matrix> gram; // of I + A^T A (denoising x-update)
  int rank = 0;

  Impl(const MeasurementEnsemble& ensemble, const WeightVector& weights, SolverConfig c)
      : A(ensemble.A), w(weights), cfg(std::move(c)) {
    if (A.cols() != w.size())
      throw std::invalid_argument("WeightedBasisPursuit: weight length != columns");
    if (cfg.feas_tol <= 0 || cfg.opt_tol <= 0 || cfg.penalty <= 0 || cfg.max_iters < 1)
      throw std::invalid_argument("WeightedBasisPursuit: tolerances must be positive");
    cod.compute(A);
    cod_t.compute(A.transpose());
    rank = static_cast<int>(cod.rank());
    const int n = static_cast<int>(A.cols());
    gram.compute(Matrix::Identity(n, n) + A.transpose() * A);
  }

  ConvexSolveReport finish(Vector x, const Vector& b, double eps, bool converged,
                           int iters, double gap) const {
    ConvexSolveReport rep;
    rep.objective = weighted_l1(x, w);
    const double resid = (A * x - b).norm();
    rep.feasibility_residual = eps > 0 ? std::max(0.0, resid - eps) : resid;
    rep.x = std::move(x);
    rep.status = converged ? SolveStatus::Optimal : SolveStatus::MaxIters;
    rep.iterations = iters;
    rep.duality_gap_estimate = gap;
    return rep;
  }

  // b is expected scaled to unit norm by the callers.
  double distance_to_range(const Vector& b) const {
    return (A * cod.solve(b) - b).norm();
  }

  // Candidate support polish: minimum-norm interpolation on S; kept only when
  // it is feasible and does not increase the objective.
  void polish_eq(const Vector& z, const Vector& b, Vector& x, double& obj) const {
    const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
    for (double thresh : {1e-4, 1e-6, 1e-8}) {
      std::vector<int> support;
      for (int i = 0; i < z.size(); ++i)
        if (std::abs(z[i]) > thresh * scale) support.push_back(i);
      if (support.empty()) continue;
      Matrix cols(A.rows(), support.size());
      for (std::size_t j = 0; j < support.size(); ++j) cols.col(j) = A.col(support[j]);
      Eigen::CompleteOrthogonalDecomposition<Matrix> sub(cols);
      const Vector xs = sub.solve(b);
      if ((cols * xs - b).norm() > cfg.feas_tol) continue;
      Vector candidate = Vector::Zero(z.size());
      for (std::size_t j = 0; j < support.size(); ++j) candidate[support[j]] = xs[j];
      const double cand_obj = weighted_l1(candidate, w);
      if (cand_obj < obj) {
        obj = cand_obj;
        x = std::move(candidate);
      }
    }
  }

  // Scale a dual estimate into {nu : |A^T nu|_i <= w_i} and return b^T nu
  // (minus eps ||nu|| for the ball-constrained problem).
  double dual_value(const Vector& nu, const Vector& b, double eps) const {
    if (nu.size() == 0) return 0.0;
    const Vector corr = A.transpose() * nu;
    double t = 1.0;
    for (int i = 0; i < w.size(); ++i) t = std::max(t, std::abs(corr[i]) / w[i]);
    const Vector scaled = nu / t;
    return b.dot(scaled) - eps * scaled.norm();
  }

  ConvexSolveReport solve_eq(const Vector& b) const;
  ConvexSolveReport solve_denoise(const Vector& b, double eps) const;
};

ConvexSolveReport WeightedBasisPursuit::Impl::solve_eq(const Vector& b) const {
  if (b.size() != A.rows())
    throw std::invalid_argument("solve_eq: right-hand side length != rows");
  const int n = static_cast<int>(A.cols());

  const double scale = b.norm();
  if (scale == 0.0) {
    Vector zero = Vector::Zero(n);
    return finish(std::move(zero), b, 0.0, true, 0, 0.0);
  }
  const Vector bs = b / scale;

  const Vector xls = cod.solve(bs);
  const double range_dist = (A * xls - bs).norm();
  if (range_dist > cfg.feas_tol) {
    ConvexSolveReport rep = finish(Vector(scale * xls), b, 0.0, false, 0, 0.0);
    rep.status = SolveStatus::Infeasible;
    return rep;
  }
  if (rank == n) {
    // The affine set is a single point; nothing to optimize.
    return finish(Vector(scale * xls), b, 0.0, true, 0, 0.0);
  }

  double rho = cfg.penalty;
  Vector x = xls;
  Vector z = x;
  Vector u = Vector::Zero(n);
  const double abs_tol = 1e-12;
  const double rel_tol = std::min(cfg.feas_tol, cfg.opt_tol);
  bool converged = false;
  int iters = 0;

  for (int t = 1; t <= cfg.max_iters; ++t) {
    iters = t;
    x = z - u;
    x -= cod.solve(A * x);
    x += xls; // projection onto {x : Ax = P_range(bs)}
    const Vector z_prev = z;
    z = weighted_soft_threshold(x + u, w, 1.0 / rho);
    u += x - z;

    const double pr = (x - z).norm();
    const double dr = rho * (z - z_prev).norm();
    const double eps_pri =
        std::sqrt(static_cast<double>(n)) * abs_tol + rel_tol * std::max(x.norm(), z.norm());
    const double eps_dual =
        std::sqrt(static_cast<double>(n)) * abs_tol + rel_tol * (rho * u.norm());
    if (pr <= eps_pri && dr <= eps_dual) {
      converged = true;
      break;
    }
    if (cfg.adaptive_penalty && t % 10 == 0) {
      if (pr > 10 * dr && rho < 1e8) {
        rho *= 2;
        u *= 0.5;
      } else if (dr > 10 * pr && rho > 1e-8) {
        rho *= 0.5;
        u *= 2;
      }
    }
  }

  // x is affine-feasible (last update is the projection); the polished vertex
  // usually removes the remaining O(tol) objective error.
  double obj = weighted_l1(x, w);
  polish_eq(z, bs, x, obj);

  const Vector nu = cod_t.solve(rho * u); // least-squares dual from A^T nu = y
  const double gap = std::max(0.0, obj - dual_value(nu, bs, 0.0));

  ConvexSolveReport rep = finish(Vector(scale * x), b, 0.0, converged, iters, scale * gap);
  return rep;
}

ConvexSolveReport WeightedBasisPursuit::Impl::solve_denoise(const Vector& b,
                                                            double eps) const {
  if (b.size() != A.rows())
    throw std::invalid_argument("solve_denoise: right-hand side length != rows");
  if (eps < 0) throw std::invalid_argument("solve_denoise: eps must be >= 0");
  if (eps == 0.0) return solve_eq(b);
  const int n = static_cast<int>(A.cols());
  const int m = static_cast<int>(A.rows());

  const double scale = b.norm();
  if (scale == 0.0 || scale <= eps) {
    // zero is feasible, hence optimal
    Vector zero = Vector::Zero(n);
    return finish(std::move(zero), b, eps, true, 0, 0.0);
  }
  const Vector bs = b / scale;
  const double eps_s = eps / scale;

  const Vector xls = cod.solve(bs);
  const double range_dist = (A * xls - bs).norm();
  if (range_dist > eps_s + cfg.feas_tol) {
    ConvexSolveReport rep = finish(Vector(scale * xls), b, eps, false, 0, 0.0);
    rep.status = SolveStatus::Infeasible;
    return rep;
  }

  double rho = cfg.penalty;
  Vector x = xls;
  Vector z = x;
  Vector r = A * x;
  Vector uz = Vector::Zero(n);
  Vector ur = Vector::Zero(m);
  const double abs_tol = 1e-12;
  const double rel_tol = std::min(cfg.feas_tol, cfg.opt_tol);
  bool converged = false;
  int iters = 0;

  for (int t = 1; t <= cfg.max_iters; ++t) {
    iters = t;
    x = gram.solve((z - uz) + A.transpose() * (r - ur));
    const Vector ax = A * x;
    const Vector z_prev = z;
    const Vector r_prev = r;
    z = weighted_soft_threshold(x + uz, w, 1.0 / rho);
    r = project_l2_ball(ax + ur, bs, eps_s);
    uz += x - z;
    ur += ax - r;

    const double pr = std::sqrt((x - z).squaredNorm() + (ax - r).squaredNorm());
    const double dr =
        rho * std::sqrt((z - z_prev).squaredNorm() +
                        (A.transpose() * (r - r_prev)).squaredNorm());
    const double norm_primal =
        std::max(std::sqrt(x.squaredNorm() + ax.squaredNorm()),
                 std::sqrt(z.squaredNorm() + r.squaredNorm()));
    const double eps_pri =
        std::sqrt(static_cast<double>(n + m)) * abs_tol + rel_tol * norm_primal;
    const double eps_dual =
        std::sqrt(static_cast<double>(n)) * abs_tol +
        rel_tol * rho *
            std::sqrt(uz.squaredNorm() + (A.transpose() * ur).squaredNorm());
    if (pr <= eps_pri && dr <= eps_dual) {
      converged = true;
      break;
    }
    if (cfg.adaptive_penalty && t % 10 == 0) {
      if (pr > 10 * dr && rho < 1e8) {
        rho *= 2;
        uz *= 0.5;
        ur *= 0.5;
      } else if (dr > 10 * pr && rho > 1e-8) {
        rho *= 0.5;
        uz *= 2;
        ur *= 2;
      }
    }
  }

  const double gap =
      std::max(0.0, weighted_l1(x, w) - dual_value(rho * ur, bs, eps_s));
  return finish(Vector(scale * x), b, eps, converged, iters, scale * gap);
}

WeightedBasisPursuit::WeightedBasisPursuit(const MeasurementEnsemble& ensemble,
                                           const WeightVector& w, SolverConfig cfg)
    : impl_(std::make_unique<Impl>(ensemble, w, std::move(cfg))) {}
WeightedBasisPursuit::~WeightedBasisPursuit() = default;
WeightedBasisPursuit::WeightedBasisPursuit(WeightedBasisPursuit&&) noexcept = default;
WeightedBasisPursuit& WeightedBasisPursuit::operator=(WeightedBasisPursuit&&) noexcept =
    default;

ConvexSolveReport WeightedBasisPursuit::solve_eq(const Vector& b) const {
  return impl_->solve_eq(b);
}

ConvexSolveReport WeightedBasisPursuit::solve_denoise(const Vector& b, double eps) const {
  return impl_->solve_denoise(b, eps);
}

double WeightedBasisPursuit::range_distance(const Vector& b) const {
  if (b.size() != impl_->A.rows())
    throw std::invalid_argument("range_distance: right-hand side length != rows");
  const double scale = b.norm();
  if (scale == 0.0) return 0.0;
  return scale * impl_->distance_to_range(b / scale);
}

const SolverConfig& WeightedBasisPursuit::config() const { return impl_->cfg; }

ConvexSolveReport solve_wbp_eq(const MeasurementEnsemble& ensemble, const Vector& b,
                               const WeightVector& w, const SolverConfig& cfg) {
  return WeightedBasisPursuit(ensemble, w, cfg).solve_eq(b);
}

ConvexSolveReport solve_wbp_denoise(const MeasurementEnsemble& ensemble, const Vector& b,
                                    const WeightVector& w, double eps,
                                    const SolverConfig& cfg) {
  return WeightedBasisPursuit(ensemble, w, cfg).solve_denoise(b, eps);
}

} // namespace wsp
