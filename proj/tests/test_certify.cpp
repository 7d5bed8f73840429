#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "wsp/certify.hpp"
#include "wsp/experiments.hpp"
#include "wsp/rng.hpp"

using namespace wsp;

namespace {

// frozen against a 40-digit evaluation of 1/(2*sqrt(2)+1) and Eq-style
// constant formulas
constexpr double kThreshold = 0.2612038749637414;
constexpr double kC1At02 = 28.050626763777235;
constexpr double kC2At02 = 18.48528137423857;

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

MeasurementEnsemble matrix(int m, int n, std::initializer_list<double> rowmajor) {
  Matrix a(m, n);
  auto it = rowmajor.begin();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = *it++;
  return MeasurementEnsemble(std::move(a));
}

MeasurementEnsemble random_gaussian(Rng& rng, int m, int n, double sd = 1.0) {
  Matrix a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = sd * rng.normal();
  return MeasurementEnsemble(std::move(a));
}

Signal random_k_sparse_unit(Rng& rng, const WeightVector& w, double k) {
  const auto supports = enumerate_weighted_supports(w, k, true);
  std::vector<SupportSet> usable;
  for (const auto& s : supports)
    if (!s.indices.empty()) usable.push_back(s);
  REQUIRE(!usable.empty());
  const auto& s = usable[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(usable.size()) - 1))];
  Signal x = Signal::Zero(w.size());
  for (int i : s.indices) x[i] = rng.normal();
  if (x.norm() == 0) x[s.indices[0]] = 1.0;
  return x / x.norm();
}

// theta bounds without the monotonicity reduction: every |I| >= ceil(m/2).
std::pair<double, double> brute_swrip(const MeasurementEnsemble& e, const WeightVector& w,
                                      double k) {
  const int m = e.m();
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& s : enumerate_weighted_supports(w, k, true)) {
    if (s.indices.empty()) continue;
    any = true;
    Matrix cols(m, s.indices.size());
    for (std::size_t j = 0; j < s.indices.size(); ++j) cols.col(j) = e.A.col(s.indices[j]);
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      const int size = __builtin_popcount(mask);
      if (2 * size < m) continue;
      Matrix rows(size, cols.cols());
      int r = 0;
      for (int i = 0; i < m; ++i)
        if (mask & (1u << i)) rows.row(r++) = cols.row(i);
      Eigen::SelfAdjointEigenSolver<Matrix> es(rows.transpose() * rows,
                                               Eigen::EigenvaluesOnly);
      tmin = std::min(tmin, es.eigenvalues().minCoeff());
      tmax = std::max(tmax, es.eigenvalues().maxCoeff());
    }
  }
  if (!any) return {1.0, 1.0};
  return {tmin, tmax};
}

MeasurementEnsemble row_submatrix(const MeasurementEnsemble& e, unsigned mask) {
  const int size = __builtin_popcount(mask);
  Matrix rows(size, e.n());
  int r = 0;
  for (int i = 0; i < e.m(); ++i)
    if (mask & (1u << i)) rows.row(r++) = e.A.row(i);
  return MeasurementEnsemble(std::move(rows));
}

} // namespace

TEST_CASE("restricted isometry constant on the worked examples") {
  // orthonormal columns: the Gram of every column subset is the identity
  CHECK(wrip_constant(MeasurementEnsemble(Matrix::Identity(3, 3)),
                      WeightVector::uniform(3), 2.0) == 0.0);

  // columns of norm 1 and 4: delta = 3 > 1 signals outright failure
  CHECK(wrip_constant(matrix(2, 2, {1, 0, 0, 2}), WeightVector::uniform(2), 1.0) == 3.0);

  // budget large enough to admit every column at once
  Rng rng(301);
  const auto e = random_gaussian(rng, 4, 3, 0.5);
  Eigen::SelfAdjointEigenSolver<Matrix> es(e.A.transpose() * e.A, Eigen::EigenvaluesOnly);
  const double expected = std::max(es.eigenvalues().maxCoeff() - 1.0,
                                   1.0 - es.eigenvalues().minCoeff());
  CHECK(wrip_constant(e, WeightVector::uniform(3), 100.0) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("strong bounds on the worked examples") {
  const auto duo = swrip_bounds(matrix(2, 1, {1, 1}), WeightVector::uniform(1), 1.0);
  CHECK(duo.first == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(duo.second == doctest::Approx(2.0).epsilon(1e-12));

  const auto id2 = swrip_bounds(matrix(2, 2, {1, 0, 0, 1}), WeightVector::uniform(2), 1.0);
  CHECK(id2.first == doctest::Approx(0.0).epsilon(1e-12));

  const double c = std::sqrt(0.4);
  const auto triple =
      swrip_bounds(matrix(3, 1, {c, c, c}), WeightVector::uniform(1), 1.0);
  CHECK(std::abs(triple.first - 0.8) <= 1e-12);
  CHECK(std::abs(triple.second - 1.2) <= 1e-12);
}

TEST_CASE("reduced row enumeration equals the full one") {
  Rng rng(303);
  for (int t = 0; t < 8; ++t) {
    const int m = rng.uniform_int(2, 6);
    const int n = rng.uniform_int(1, 4);
    const auto e = random_gaussian(rng, m, n, 1.0 / std::sqrt(m));
    const WeightVector w = WeightVector::uniform(n);
    const double k = rng.uniform_int(1, n);
    const auto fast = swrip_bounds(e, w, k);
    const auto slow = brute_swrip(e, w, k);
    CHECK(fast.first == doctest::Approx(slow.first).epsilon(1e-12));
    CHECK(fast.second == doctest::Approx(slow.second).epsilon(1e-12));
  }
}

TEST_CASE("hypothesis checks use the exact thresholds") {
  CHECK(std::abs(wrip_delta_threshold() - kThreshold) <= 1e-12);

  CHECK(check_wrip_hypothesis(0.0, 2.0, WeightVector::uniform(3)));
  CHECK_FALSE(check_wrip_hypothesis(kThreshold, 2.0, WeightVector::uniform(3)));
  CHECK(check_wrip_hypothesis(kThreshold - 1e-9, 2.0, WeightVector::uniform(3)));
  // 2 ||w||_inf^2 = 2.88 > 2
  CHECK_FALSE(check_wrip_hypothesis(0.0, 2.0, WeightVector::uniform(3, 1.2)));

  CHECK(check_swrip_hypothesis(0.8, 1.2));
  CHECK_FALSE(check_swrip_hypothesis(1.0, 2.0));
  CHECK_FALSE(check_swrip_hypothesis(0.5, 1.1));
  // open intervals
  CHECK_FALSE(check_swrip_hypothesis(1.0 - kThreshold, 1.1));
  CHECK_FALSE(check_swrip_hypothesis(0.9, 1.0));
}

TEST_CASE("stable recovery constants") {
  const auto at0 = stable_recovery_constants(0.0);
  CHECK(at0.first == 6.0);
  CHECK(at0.second == 4.0);

  const auto at02 = stable_recovery_constants(0.2);
  CHECK(std::abs(at02.first - kC1At02) <= 1e-12 * kC1At02);
  CHECK(std::abs(at02.second - kC2At02) <= 1e-12 * kC2At02);

  CHECK_THROWS_AS(stable_recovery_constants(kThreshold), std::domain_error);
  CHECK_THROWS_AS(stable_recovery_constants(0.5), std::domain_error);
  CHECK_THROWS_AS(stable_recovery_constants(-0.1), std::domain_error);

  double prev_c1 = 0.0, prev_c2 = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double delta = 0.26 * i / 99.0;
    const auto [c1, c2] = stable_recovery_constants(delta);
    CHECK(c1 > prev_c1);
    CHECK(c2 > prev_c2);
    prev_c1 = c1;
    prev_c2 = c2;
  }
}

TEST_CASE("theta to delta reduction") {
  CHECK(swrip_to_wrip_delta(0.8, 1.2) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(swrip_to_wrip_delta(1.0, 1.0) == 0.0);
  CHECK(swrip_to_wrip_delta(0.5, 1.1) == 0.5);
  CHECK_THROWS_AS(swrip_to_wrip_delta(1.2, 0.8), std::invalid_argument);
}

TEST_CASE("error bound arithmetic") {
  CHECK(error_bound(0.0, 0.0, 4.0, 6.0, 4.0) == 0.0);
  CHECK(error_bound(0.1, 0.0, 4.0, 6.0, 4.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(error_bound(0.0, 2.0, 4.0, 6.0, 4.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(error_bound(-0.1, 0.0, 4.0, 6.0, 4.0), std::invalid_argument);
}

TEST_CASE("row submatrices obey the theta-derived isometry bound") {
  Rng rng(307);
  for (int t = 0; t < 6; ++t) {
    const int m = rng.uniform_int(3, 6);
    const int n = rng.uniform_int(2, 5);
    const auto e = random_gaussian(rng, m, n, 1.0 / std::sqrt(m));
    const WeightVector w = WeightVector::uniform(n);
    const double k = 1.0 + rng.uniform_int(0, n - 1);
    const auto [tm, tp] = swrip_bounds(e, w, k);
    const double bound = swrip_to_wrip_delta(std::max(0.0, tm), std::max(tm, tp));
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
      if (2 * __builtin_popcount(mask) < m) continue;
      CHECK(wrip_constant(row_submatrix(e, mask), w, k) <= bound + 1e-9);
    }
  }
}

TEST_CASE("delta grows with the sparsity budget") {
  Rng rng(311);
  for (int t = 0; t < 25; ++t) {
    const auto e = random_gaussian(rng, 5, 5, 1.0 / std::sqrt(5.0));
    const WeightVector w = WeightVector::uniform(5);
    double prev = -1.0;
    for (double k = 1.0; k <= 5.0; k += 1.0) {
      const double delta = wrip_constant(e, w, k);
      CHECK(delta >= prev - 1e-12);
      prev = delta;
    }
  }
}

TEST_CASE("theta ordering and the even-m energy split") {
  Rng rng(313);
  for (int t = 0; t < 20; ++t) {
    const int m = rng.uniform_int(2, 6);
    const int n = rng.uniform_int(1, 4);
    const auto e = random_gaussian(rng, m, n, 1.0 / std::sqrt(m));
    const WeightVector w = WeightVector::uniform(n);
    const auto [tm, tp] = swrip_bounds(e, w, 1.0);
    CHECK(tm <= tp + 1e-12);
    if (m % 2 == 0) CHECK(tm <= tp / 2 + 1e-9);
  }
}

TEST_CASE("certified bounds are never violated by sampled sparse vectors") {
  Rng rng(317);
  for (int t = 0; t < 4; ++t) {
    const int m = rng.uniform_int(3, 6);
    const int n = rng.uniform_int(2, 5);
    const auto e = random_gaussian(rng, m, n, 1.0 / std::sqrt(m));
    Eigen::VectorXd wraw(n);
    for (int i = 0; i < n; ++i) wraw[i] = rng.uniform(1.0, 2.0);
    const WeightVector w{wraw};
    const double k = rng.uniform(1.0, n);
    const double delta = wrip_constant(e, w, k);
    const auto [tm, tp] = swrip_bounds(e, w, k);
    const int half = (m + 1) / 2;
    for (int s = 0; s < 2500; ++s) {
      const Signal x = random_k_sparse_unit(rng, w, k);
      const double energy = (e.A * x).squaredNorm();
      CHECK(energy >= 1.0 - delta - 1e-9);
      CHECK(energy <= 1.0 + delta + 1e-9);
      CHECK(energy <= tp + 1e-9);
      // spot-check one random half-row subset against theta_-
      std::vector<int> rows(m);
      std::iota(rows.begin(), rows.end(), 0);
      for (int i = m - 1; i > 0; --i) std::swap(rows[i], rows[rng.uniform_int(0, i)]);
      Matrix sub(half, n);
      for (int i = 0; i < half; ++i) sub.row(i) = e.A.row(rows[i]);
      CHECK((sub * x).squaredNorm() >= tm - 1e-9);
    }
  }
}

TEST_CASE("certificate assembly for the hand-certified family") {
  const double c = std::sqrt(0.4);
  const auto e = matrix(3, 1, {c, c, c});
  const CertificateReport rep = certify(e, WeightVector::uniform(1), 2.0);
  CHECK(rep.order_k == 4.0);
  CHECK(std::abs(rep.theta_minus - 0.8) <= 1e-12);
  CHECK(std::abs(rep.theta_plus - 1.2) <= 1e-12);
  CHECK(rep.swrip_hypothesis_pass);
  CHECK_FALSE(rep.even_m_window_unsatisfiable);
  CHECK(rep.constants_source == ConstantsSource::Swrip);
  CHECK(std::abs(rep.c1 - kC1At02) <= 1e-9 * kC1At02);
  CHECK(std::abs(rep.c2 - kC2At02) <= 1e-9 * kC2At02);
  CHECK(rep.enumeration_counts.supports == 1);
  CHECK(rep.enumeration_counts.row_subsets == 3);
}

TEST_CASE("even m is flagged as an unsatisfiable hypothesis window") {
  Rng rng(331);
  const auto e = random_gaussian(rng, 4, 2, 0.5);
  const CertificateReport rep = certify(e, WeightVector::uniform(2), 1.0);
  CHECK(rep.even_m_window_unsatisfiable);
  CHECK_FALSE(rep.swrip_hypothesis_pass);
}

TEST_CASE("falsifier finds the identity-matrix tie") {
  const auto e = matrix(2, 2, {1, 0, 0, 1});
  const WeightVector w = WeightVector::uniform(2);
  WnspSearchStats stats;
  const auto cex = wnsp_falsify_real(e, w, 2.0, {}, &stats);
  REQUIRE(cex.has_value());
  CHECK(validate_wnsp_counterexample(e, w, 2.0, *cex));
  CHECK(cex->lhs >= cex->rhs - 1e-12);
  CHECK(stats.samples > 0);
}

TEST_CASE("falsifier reports NotFound where uniqueness holds") {
  const auto e = matrix(3, 2, {1, 0, 0, 1, 1, 1});
  const WeightVector w = WeightVector::uniform(2);
  WnspSearchStats stats;
  const auto cex = wnsp_falsify_real(e, w, 1.0, {}, &stats);
  CHECK_FALSE(cex.has_value());
  CHECK(stats.best_margin < 0.0);

  // cross-validation: 1-sparse signals are indeed uniquely recoverable
  Rng rng(337);
  for (int t = 0; t < 10; ++t) {
    Signal x0 = Signal::Zero(2);
    x0[rng.uniform_int(0, 1)] = rng.sign() * rng.uniform(0.5, 2.0);
    CHECK(verify_unique_recovery(e, x0, w));
  }
}

TEST_CASE("sparse null vectors produce the structural counterexample family") {
  // rank-1 matrix: (1, -1) spans the null space and is weighted 2-sparse
  const auto e = matrix(2, 2, {1, 1, 2, 2});
  const WeightVector w = WeightVector::uniform(2);
  const auto cex = wnsp_falsify_real(e, w, 2.0);
  REQUIRE(cex.has_value());
  CHECK(cex->u_minus_v_zero);
  CHECK(cex->rhs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cex->lhs > 0.0);
  CHECK(validate_wnsp_counterexample(e, w, 2.0, *cex));
  // the replayed instance breaks uniqueness outright
  CHECK_FALSE(verify_unique_recovery(e, Signal(cex->u + cex->v), w));
}

TEST_CASE("counterexamples replay the recovery-failure construction") {
  Rng rng(347);
  int found = 0;
  for (int t = 0; t < 25; ++t) {
    const int m = rng.uniform_int(2, 4);
    const int n = rng.uniform_int(2, 4);
    MeasurementEnsemble e = random_gaussian(rng, m, n, 1.0);
    if (t % 3 == 0 && n >= 2) e.A.col(n - 1) = 2.0 * e.A.col(0); // force rank deficiency
    const WeightVector w = WeightVector::uniform(n);
    const double k = static_cast<double>(n);
    const auto cex = wnsp_falsify_real(e, w, k);
    if (!cex) continue;
    ++found;
    std::string why;
    CHECK_MESSAGE(validate_wnsp_counterexample(e, w, k, *cex, &why), why);
    const Signal x0 = cex->u + cex->v;
    const Signal xhat = cex->u - cex->v;
    CHECK(((e.A * x0).cwiseAbs() - (e.A * xhat).cwiseAbs()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(weighted_l1(xhat, w) <= weighted_l1(x0, w) + 1e-9);
    const bool xhat_is_x0_class = global_sign_error(xhat, x0) <= 1e-6 * (1 + x0.norm());
    if (!xhat_is_x0_class) CHECK_FALSE(verify_unique_recovery(e, x0, w));
  }
  CHECK(found > 0); // wide square/rank-deficient matrices cannot all pass
}

TEST_CASE("falsifier respects the row cap") {
  CHECK_THROWS_AS(wnsp_falsify_real(MeasurementEnsemble(Matrix::Random(15, 2)),
                                    WeightVector::uniform(2), 1.0),
                  CapExceeded);
}
