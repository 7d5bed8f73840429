#include "wsp/certify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wsp/rng.hpp"

namespace wsp {

double wrip_delta_threshold() { return 1.0 / (2.0 * std::sqrt(2.0) + 1.0); }

const char* to_string(ConstantsSource s) {
  switch (s) {
    case ConstantsSource::None: return "none";
    case ConstantsSource::Swrip: return "swrip";
    case ConstantsSource::Wrip: return "wrip";
  }
  return "unknown";
}

namespace {

Matrix columns(const Matrix& a, const std::vector<int>& idx) {
  Matrix out(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = a.col(idx[j]);
  return out;
}

Matrix rows(const Matrix& a, const std::vector<int>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = a.row(idx[i]);
  return out;
}

std::pair<double, double> eig_range(const Matrix& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

double binomial(int n, int r) {
  double out = 1.0;
  for (int i = 0; i < r; ++i) out = out * (n - i) / (i + 1);
  return out;
}

// Visits all size-h subsets of [0, m) in lexicographic order.
template <typename Fn>
void for_each_combination(int m, int h, Fn&& fn) {
  std::vector<int> idx(h);
  for (int i = 0; i < h; ++i) idx[i] = i;
  for (;;) {
    fn(idx);
    int i = h - 1;
    while (i >= 0 && idx[i] == m - h + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < h; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Orthonormal basis of the null space of M acting on R^cols; rank decided by
// the singular-value drop. Zero-row matrices have the full space as kernel.
Matrix null_space_basis(const Matrix& m_in, int cols, double rtol = 1e-10) {
  if (m_in.rows() == 0) return Matrix::Identity(cols, cols);
  Eigen::JacobiSVD<Matrix> svd(m_in, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rtol * std::max(smax, 1e-300)) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

} // namespace

double wrip_constant(const MeasurementEnsemble& ensemble, const WeightVector& w,
                     double k, int cap) {
  if (w.size() != ensemble.n())
    throw std::invalid_argument("wrip_constant: weight length != columns");
  if (!(k > 0)) throw std::invalid_argument("wrip_constant: k must be > 0");

  double delta = 0.0;
  SupportStream stream(w, k, /*maximal_only=*/true, cap);
  while (auto s = stream.next()) {
    if (s->indices.empty()) continue; // only the zero signal; vacuous
    const Matrix sub = columns(ensemble.A, s->indices);
    const auto [lo, hi] = eig_range(sub.transpose() * sub);
    delta = std::max({delta, hi - 1.0, 1.0 - lo});
  }
  return delta;
}

std::pair<double, double> swrip_bounds(const MeasurementEnsemble& ensemble,
                                       const WeightVector& w, double k,
                                       const CertifyCaps& caps,
                                       EnumerationCounts* counts) {
  if (w.size() != ensemble.n())
    throw std::invalid_argument("swrip_bounds: weight length != columns");
  if (!(k > 0)) throw std::invalid_argument("swrip_bounds: k must be > 0");
  const int m = ensemble.m();
  const int half = (m + 1) / 2; // |I| >= m/2 with integer sizes
  if (m > caps.row_subset_cap)
    throw CapExceeded("swrip_bounds: m = " + std::to_string(m) +
                          " exceeds the row-subset cap " +
                          std::to_string(caps.row_subset_cap),
                      binomial(m, half));

  // Row energy is monotone in I, so the upper bound is attained at the full
  // row set and the lower bound at some subset of size exactly ceil(m/2).
  double theta_minus = std::numeric_limits<double>::infinity();
  double theta_plus = -std::numeric_limits<double>::infinity();
  std::int64_t support_count = 0;
  std::int64_t row_subset_count = 0;

  SupportStream stream(w, k, /*maximal_only=*/true, caps.support_cap);
  while (auto s = stream.next()) {
    if (s->indices.empty()) continue;
    ++support_count;
    const Matrix sub = columns(ensemble.A, s->indices);
    theta_plus = std::max(theta_plus, eig_range(sub.transpose() * sub).second);
    for_each_combination(m, half, [&](const std::vector<int>& row_idx) {
      ++row_subset_count;
      const Matrix part = rows(sub, row_idx);
      theta_minus = std::min(theta_minus, eig_range(part.transpose() * part).first);
    });
  }

  if (counts) {
    counts->supports = support_count;
    counts->row_subsets = row_subset_count;
  }
  if (support_count == 0) return {1.0, 1.0}; // vacuous: only the zero signal
  return {theta_minus, theta_plus};
}

bool check_wrip_hypothesis(double delta, double k, const WeightVector& w) {
  const double wmax = w.max_weight();
  return delta < wrip_delta_threshold() && k >= 2.0 * wmax * wmax;
}

bool check_swrip_hypothesis(double theta_minus, double theta_plus) {
  const double thr = wrip_delta_threshold();
  return theta_minus > 1.0 - thr && theta_minus < 1.0 && theta_plus > 1.0 &&
         theta_plus < 1.0 + thr;
}

std::pair<double, double> stable_recovery_constants(double delta) {
  if (delta < 0) throw std::domain_error("stable_recovery_constants: delta must be >= 0");
  const double root2 = std::sqrt(2.0);
  const double denom = 1.0 - (1.0 + 2.0 * root2) * delta;
  if (denom <= 0)
    throw std::domain_error(
        "stable_recovery_constants: delta >= 1/(1+2*sqrt(2)); constants undefined");
  const double c1 = 6.0 * std::sqrt(1.0 + delta) / denom;
  const double c2 = 4.0 * (1.0 + (root2 - 1.0) * delta) / denom;
  return {c1, c2};
}

double swrip_to_wrip_delta(double theta_minus, double theta_plus) {
  if (theta_minus < 0 || theta_minus > theta_plus)
    throw std::invalid_argument("swrip_to_wrip_delta: need 0 <= theta_- <= theta_+");
  return std::max(1.0 - theta_minus, theta_plus - 1.0);
}

double error_bound(double eps, double sigma_k, double k, double c1, double c2) {
  if (eps < 0 || sigma_k < 0 || c1 < 0 || c2 < 0)
    throw std::invalid_argument("error_bound: inputs must be nonnegative");
  if (!(k > 0)) throw std::invalid_argument("error_bound: k must be > 0");
  return c1 * eps + c2 * sigma_k / std::sqrt(k);
}

CertificateReport certify(const MeasurementEnsemble& ensemble, const WeightVector& w,
                          double k, const CertifyCaps& caps) {
  CertificateReport rep;
  rep.order_k = 2.0 * k;
  rep.delta_w_k = wrip_constant(ensemble, w, rep.order_k, caps.support_cap);
  auto [tm, tp] = swrip_bounds(ensemble, w, rep.order_k, caps, &rep.enumeration_counts);
  rep.theta_minus = tm;
  rep.theta_plus = tp;

  const double wmax = w.max_weight();
  rep.wrip_hypothesis_pass = check_wrip_hypothesis(rep.delta_w_k, k, w);
  rep.swrip_hypothesis_pass =
      check_swrip_hypothesis(tm, tp) && k >= 2.0 * wmax * wmax;
  rep.even_m_window_unsatisfiable = ensemble.m() % 2 == 0;

  const double thr = wrip_delta_threshold();
  const double delta_sw = swrip_to_wrip_delta(std::min(tm, tp), tp);
  if (tm <= tp && delta_sw < thr) {
    std::tie(rep.c1, rep.c2) = stable_recovery_constants(delta_sw);
    rep.constants_source = ConstantsSource::Swrip;
  } else if (rep.delta_w_k < thr) {
    std::tie(rep.c1, rep.c2) = stable_recovery_constants(rep.delta_w_k);
    rep.constants_source = ConstantsSource::Wrip;
  }
  return rep;
}

// ---- falsification search ----

namespace {

struct WitnessMaps {
  Matrix plus;  // gamma -> u + v
  Matrix minus; // gamma -> u - v
  Matrix ns;    // null basis of A_S
  Matrix nsc;   // null basis of A_{S^c}
  Matrix stacked; // coordinates (alpha; beta) = stacked * gamma
};

struct Candidate {
  Signal u, v;
  double margin = -std::numeric_limits<double>::infinity();
  double lhs = 0.0, rhs = 0.0;
  bool ok = false;
};

Candidate evaluate(const WitnessMaps& maps, const WeightVector& w, Vector gamma,
                   double witness_floor) {
  Candidate out;
  const Vector plus = maps.plus * gamma;
  const double np = plus.norm();
  if (np < 1e-12) return out;
  gamma /= np;
  const Vector coords = maps.stacked * gamma;
  const int ds = static_cast<int>(maps.ns.cols());
  out.u = maps.ns * coords.head(ds);
  out.v = maps.nsc * coords.tail(coords.size() - ds);
  if (out.u.norm() < witness_floor || out.v.norm() < witness_floor) return out;
  out.lhs = weighted_l1(out.u + out.v, w);
  out.rhs = weighted_l1(out.u - out.v, w);
  out.margin = out.lhs - out.rhs;
  out.ok = true;
  return out;
}

std::vector<int> mask_to_rows(std::uint64_t mask, int m) {
  std::vector<int> out;
  for (int j = 0; j < m; ++j)
    if (mask & (std::uint64_t{1} << j)) out.push_back(j);
  return out;
}

} // namespace

bool validate_wnsp_counterexample(const MeasurementEnsemble& ensemble,
                                  const WeightVector& w, double k,
                                  const WnspCounterexample& cex, std::string* why) {
  auto fail = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  const int m = ensemble.m();
  const int n = ensemble.n();
  if (cex.u.size() != n || cex.v.size() != n) return fail("witness length != columns");
  for (int r : cex.rows)
    if (r < 0 || r >= m) return fail("row index out of range");

  const Signal sum = cex.u + cex.v;
  const Signal diff = cex.u - cex.v;
  const double np = sum.norm();
  if (np <= 0) return fail("u + v vanishes");
  if (cex.u.norm() <= 1e-12 * np) return fail("u is (numerically) zero");
  if (cex.v.norm() <= 1e-12 * np) return fail("v is (numerically) zero");

  std::vector<int> comp;
  {
    std::vector<bool> in_s(m, false);
    for (int r : cex.rows) in_s[r] = true;
    for (int j = 0; j < m; ++j)
      if (!in_s[j]) comp.push_back(j);
  }
  if (!cex.rows.empty() && (rows(ensemble.A, cex.rows) * cex.u).norm() > 1e-9 * (1.0 + np))
    return fail("u is not in the null space of A_S");
  if (!comp.empty() && (rows(ensemble.A, comp) * cex.v).norm() > 1e-9 * (1.0 + np))
    return fail("v is not in the null space of A_{S^c}");

  const double wl0 =
      weighted_l0(sum, w, 1e-9 * std::max(1.0, sum.cwiseAbs().maxCoeff()));
  if (wl0 > k + 1e-12) return fail("u + v is not weighted k-sparse");

  const double lhs = weighted_l1(sum, w);
  const double rhs = weighted_l1(diff, w);
  if (std::abs(lhs - cex.lhs) > 1e-9 * (1.0 + lhs)) return fail("stored lhs mismatch");
  if (std::abs(rhs - cex.rhs) > 1e-9 * (1.0 + rhs)) return fail("stored rhs mismatch");
  if (lhs < rhs - 1e-12) return fail("no violation: lhs < rhs");

  // Replay of the recovery-failure construction: x0 := u+v, xhat := u-v must
  // give identical magnitudes and a no-worse objective.
  const Vector mag0 = (ensemble.A * sum).cwiseAbs();
  const Vector mag1 = (ensemble.A * diff).cwiseAbs();
  if ((mag0 - mag1).cwiseAbs().maxCoeff() > 1e-8)
    return fail("magnitude replay |A(u+v)| = |A(u-v)| fails");
  if (rhs > lhs + 1e-9) return fail("replay objective comparison fails");
  if (why) why->clear();
  return true;
}

std::optional<WnspCounterexample> wnsp_falsify_real(const MeasurementEnsemble& ensemble,
                                                    const WeightVector& w, double k,
                                                    const SearchBudget& budget,
                                                    WnspSearchStats* stats,
                                                    const CertifyCaps& caps) {
  if (w.size() != ensemble.n())
    throw std::invalid_argument("wnsp_falsify_real: weight length != columns");
  if (!(k > 0)) throw std::invalid_argument("wnsp_falsify_real: k must be > 0");
  const int m = ensemble.m();
  const int n = ensemble.n();
  if (m > caps.row_subset_cap)
    throw CapExceeded("wnsp_falsify_real: m = " + std::to_string(m) +
                          " exceeds the row-subset cap " +
                          std::to_string(caps.row_subset_cap) + " (2^" +
                          std::to_string(m - 1) + " subset pairs)",
                      std::pow(2.0, m - 1));

  WnspSearchStats local;
  WnspSearchStats& st = stats ? *stats : local;

  const std::vector<SupportSet> supports =
      enumerate_weighted_supports(w, k, /*maximal_only=*/true, caps.support_cap);

  auto accept = [&](WnspCounterexample cex) -> std::optional<WnspCounterexample> {
    cex.sparsity_witness = weighted_l0(
        cex.u + cex.v, w,
        1e-9 * std::max(1.0, (cex.u + cex.v).cwiseAbs().maxCoeff()));
    cex.u_minus_v_zero = (cex.u - cex.v).norm() <= 1e-12 * (1.0 + (cex.u + cex.v).norm());
    if (validate_wnsp_counterexample(ensemble, w, k, cex)) return cex;
    return std::nullopt;
  };

  // Structural pre-pass: a weighted k-sparse null vector z of the full matrix
  // yields the S = [1:m] family with u = v = z (lhs = 2||z||_{w,1}, rhs = 0).
  for (const SupportSet& t : supports) {
    if (t.indices.empty()) continue;
    const Matrix sub = columns(ensemble.A, t.indices);
    const Matrix kernel = null_space_basis(sub, static_cast<int>(t.indices.size()));
    if (kernel.cols() == 0) continue;
    Signal z = Signal::Zero(n);
    for (std::size_t j = 0; j < t.indices.size(); ++j) z[t.indices[j]] = kernel(j, 0);
    z /= 2.0 * z.norm(); // normalize so ||u + v||_2 = 1
    WnspCounterexample cex;
    cex.rows = mask_to_rows((std::uint64_t{1} << m) - 1, m);
    cex.u = z;
    cex.v = z;
    cex.lhs = weighted_l1(cex.u + cex.v, w);
    cex.rhs = weighted_l1(cex.u - cex.v, w);
    if (auto found = accept(std::move(cex))) return found;
  }

  // General search over (S, T): the witness pairs form a linear subspace per
  // combination; S and its complement play symmetric roles, so row 0 is kept
  // out of S.
  const std::uint64_t mask_count = std::uint64_t{1} << (m - 1);
  for (std::uint64_t half_mask = 0; half_mask < mask_count; ++half_mask) {
    const std::uint64_t s_mask = half_mask << 1; // row 0 always in S^c
    const std::vector<int> s_rows = mask_to_rows(s_mask, m);
    std::vector<int> sc_rows;
    for (int j = 0; j < m; ++j)
      if (!(s_mask & (std::uint64_t{1} << j))) sc_rows.push_back(j);

    const Matrix ns = null_space_basis(rows(ensemble.A, s_rows), n);
    if (ns.cols() == 0) continue;
    const Matrix nsc = null_space_basis(rows(ensemble.A, sc_rows), n);
    if (nsc.cols() == 0) continue;
    const int ds = static_cast<int>(ns.cols());
    const int dsc = static_cast<int>(nsc.cols());

    for (const SupportSet& t : supports) {
      if (t.indices.empty()) continue;
      std::vector<int> t_comp;
      {
        std::vector<bool> in_t(n, false);
        for (int i : t.indices) in_t[i] = true;
        for (int i = 0; i < n; ++i)
          if (!in_t[i]) t_comp.push_back(i);
      }
      // (u + v) restricted to T^c must vanish.
      Matrix constraint(static_cast<Eigen::Index>(t_comp.size()), ds + dsc);
      if (!t_comp.empty()) {
        constraint.leftCols(ds) = rows(ns, t_comp);
        constraint.rightCols(dsc) = rows(nsc, t_comp);
      }
      const Matrix stacked = null_space_basis(constraint, ds + dsc);
      if (stacked.cols() == 0) continue;
      ++st.subspaces;

      WitnessMaps maps;
      maps.ns = ns;
      maps.nsc = nsc;
      maps.stacked = stacked;
      Matrix joined(n, ds + dsc), joined_minus(n, ds + dsc);
      joined.leftCols(ds) = ns;
      joined.rightCols(dsc) = nsc;
      joined_minus.leftCols(ds) = ns;
      joined_minus.rightCols(dsc) = -nsc;
      maps.plus = joined * stacked;
      maps.minus = joined_minus * stacked;

      const int dim = static_cast<int>(stacked.cols());
      Eigen::LDLT<Matrix> gram_solver(
          Matrix(maps.plus.transpose() * maps.plus +
                 1e-14 * Matrix::Identity(dim, dim)));

      std::uint64_t t_seed = mix_seed(budget.seed, s_mask + 1);
      for (int i : t.indices) t_seed = mix_seed(t_seed, static_cast<std::uint64_t>(i) + 101);
      Rng rng(t_seed);

      const int total = dim + budget.directions;
      for (int c = 0; c < total; ++c) {
        Vector gamma(dim);
        if (c < dim) {
          gamma.setZero();
          gamma[c] = 1.0;
        } else {
          for (int d = 0; d < dim; ++d) gamma[d] = rng.normal();
        }
        ++st.samples;
        Candidate cand = evaluate(maps, w, gamma, budget.witness_floor);
        if (!cand.ok) continue;
        st.best_margin = std::max(st.best_margin, cand.margin);

        // Per-orthant polish: with the sign patterns frozen the margin is a
        // linear functional of gamma; maximize it on the ||u+v||_2 = 1 shell.
        Vector best_gamma = gamma / (maps.plus * gamma).norm();
        for (int round = 0; round < budget.polish_rounds; ++round) {
          const Vector plus = maps.plus * best_gamma;
          const Vector minus = maps.minus * best_gamma;
          Vector grad_coeff_plus(n), grad_coeff_minus(n);
          for (int i = 0; i < n; ++i) {
            const double sp = plus[i] > 1e-14 ? 1.0 : (plus[i] < -1e-14 ? -1.0 : 0.0);
            const double sm = minus[i] > 1e-14 ? 1.0 : (minus[i] < -1e-14 ? -1.0 : 0.0);
            grad_coeff_plus[i] = w[i] * sp;
            grad_coeff_minus[i] = w[i] * sm;
          }
          const Vector a = maps.plus.transpose() * grad_coeff_plus -
                           maps.minus.transpose() * grad_coeff_minus;
          Vector trial = gram_solver.solve(a);
          const double tn = (maps.plus * trial).norm();
          if (tn < 1e-12) break;
          trial /= tn;
          Candidate polished = evaluate(maps, w, trial, budget.witness_floor);
          if (polished.ok && polished.margin > cand.margin + 1e-15) {
            cand = polished;
            best_gamma = trial;
            st.best_margin = std::max(st.best_margin, cand.margin);
          } else {
            break;
          }
        }

        if (cand.margin >= -1e-12) {
          WnspCounterexample cex;
          cex.rows = s_rows;
          cex.u = cand.u;
          cex.v = cand.v;
          cex.lhs = cand.lhs;
          cex.rhs = cand.rhs;
          if (auto found = accept(std::move(cex))) return found;
        }
      }
    }
  }
  return std::nullopt;
}

} // namespace wsp
