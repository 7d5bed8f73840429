#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "wsp/phaseless.hpp"
#include "wsp/rng.hpp"

using namespace wsp;

namespace {

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

MeasurementEnsemble random_gaussian(Rng& rng, int m, int n) {
  Matrix a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return MeasurementEnsemble(std::move(a));
}

Signal random_sparse(Rng& rng, int n, int nnz) {
  Signal x = Signal::Zero(n);
  for (int t = 0; t < nnz; ++t)
    x[rng.uniform_int(0, n - 1)] = rng.sign() * rng.uniform(1.0, 2.0);
  return x;
}

bool contains_class(const std::vector<Signal>& sols, const Signal& x, double tol) {
  return std::any_of(sols.begin(), sols.end(), [&](const Signal& s) {
    return global_sign_error(s, x) <= tol;
  });
}

// the uniqueness showcase: rows (1,0), (0,1), (1,1)
MeasurementEnsemble showcase() { return matrix(3, 2, {1, 0, 0, 1, 1, 1}); }

} // namespace

TEST_CASE("exact solver in one dimension") {
  const auto rep = solve_phaseless_exact(matrix(1, 1, {1}),
                                         PhaselessObservation(vec({5}), 0.0),
                                         WeightVector::uniform(1));
  REQUIRE(rep.solutions.size() == 1);
  CHECK(rep.solutions[0][0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(rep.objective == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(rep.status == PhaselessStatus::ExactEnumeration);
}

TEST_CASE("identity matrix shows the expected non-uniqueness") {
  const auto rep = solve_phaseless_exact(matrix(2, 2, {1, 0, 0, 1}),
                                         PhaselessObservation(vec({1, 2}), 0.0),
                                         WeightVector::uniform(2));
  CHECK(rep.patterns_tried == 2);
  CHECK(rep.objective == doctest::Approx(3.0).epsilon(1e-9));
  REQUIRE(rep.solutions.size() == 2);
  CHECK(contains_class(rep.solutions, vec({1, 2}), 1e-6));
  CHECK(contains_class(rep.solutions, vec({1, -2}), 1e-6));
}

TEST_CASE("an extra correlating row restores uniqueness") {
  const auto rep = solve_phaseless_exact(showcase(),
                                         PhaselessObservation(vec({1, 2, 3}), 0.0),
                                         WeightVector::uniform(2));
  CHECK(rep.patterns_tried == 4);
  CHECK(rep.patterns_feasible >= 1);
  CHECK(rep.objective == doctest::Approx(3.0).epsilon(1e-9));
  REQUIRE(rep.solutions.size() == 1);
  CHECK(contains_class(rep.solutions, vec({1, 2}), 1e-6));
}

TEST_CASE("pattern cap and all-infeasible errors") {
  CHECK_THROWS_AS(
      solve_phaseless_exact(MeasurementEnsemble(Matrix::Random(17, 2)),
                            PhaselessObservation(Vector::Ones(17), 0.0),
                            WeightVector::uniform(2)),
      CapExceeded);
  // both sign patterns of (1, 2) are outside the range of (1; 1)
  CHECK_THROWS_AS(
      solve_phaseless_exact(matrix(2, 1, {1, 1}), PhaselessObservation(vec({1, 2}), 0.0),
                            WeightVector::uniform(1)),
      AllPatternsInfeasible);
}

TEST_CASE("alternating minimization fixes consistent initializations") {
  const auto e = showcase();
  const Signal x0 = vec({1, 2});
  const PhaselessObservation obs((e.A * x0).cwiseAbs(), 0.0);
  const auto rep =
      solve_phaseless_altmin(e, obs, WeightVector::uniform(2), x0, 20);
  CHECK(rep.status == PhaselessStatus::Heuristic);
  CHECK(rep.objective == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(global_sign_error(rep.solutions[0], x0) <= 1e-6);
}

TEST_CASE("alternating minimization from the default initialization") {
  const auto e = showcase();
  const PhaselessObservation obs(vec({1, 2, 3}), 0.0);
  const Signal init = altmin_default_init(e, obs);
  // the all-+1 least squares solution is (1, 2) here, a fixed point
  CHECK((init - vec({1, 2})).norm() <= 1e-9);
  const auto rep =
      solve_phaseless_altmin(e, obs, WeightVector::uniform(2), init, 20);
  CHECK(global_sign_error(rep.solutions[0], vec({1, 2})) <= 1e-6);
}

TEST_CASE("alternating minimization collapses to zero on zero magnitudes") {
  const auto e = matrix(2, 2, {1, 0, 0, 1});
  const auto rep = solve_phaseless_altmin(e, PhaselessObservation(vec({0, 0}), 0.0),
                                          WeightVector::uniform(2), vec({3, -4}), 10);
  CHECK(rep.solutions[0].norm() == 0.0);
  CHECK(rep.objective == 0.0);
}

TEST_CASE("uniqueness verification on the worked instances") {
  CHECK_FALSE(verify_unique_recovery(matrix(2, 2, {1, 0, 0, 1}), vec({1, 2}),
                                     WeightVector::uniform(2)));
  CHECK(verify_unique_recovery(showcase(), vec({1, 2}), WeightVector::uniform(2)));
  CHECK(verify_unique_recovery(matrix(1, 1, {1}), vec({5}), WeightVector::uniform(1)));
  CHECK_THROWS_AS(
      verify_unique_recovery(showcase(), vec({0, 0}), WeightVector::uniform(2)),
      std::invalid_argument);
}

TEST_CASE("reports are invariant under a global sign flip of the truth") {
  Rng rng(211);
  for (int t = 0; t < 10; ++t) {
    const auto e = random_gaussian(rng, 5, 3);
    const Signal x0 = random_sparse(rng, 3, 2);
    const WeightVector w = WeightVector::uniform(3);
    const PhaselessObservation pos((e.A * x0).cwiseAbs(), 0.0);
    const PhaselessObservation neg((e.A * (-x0)).cwiseAbs(), 0.0);
    const auto a = solve_phaseless_exact(e, pos, w);
    const auto b = solve_phaseless_exact(e, neg, w);
    REQUIRE(a.solutions.size() == b.solutions.size());
    for (std::size_t i = 0; i < a.solutions.size(); ++i)
      CHECK(global_sign_error(a.solutions[i], b.solutions[i]) <= 1e-8);
  }
}

TEST_CASE("the truth is always feasible, so the optimum cannot exceed it") {
  Rng rng(223);
  for (int t = 0; t < 20; ++t) {
    const int n = rng.uniform_int(2, 5);
    const int m = rng.uniform_int(1, 8);
    const auto e = random_gaussian(rng, m, n);
    const Signal x0 = random_sparse(rng, n, 1 + n / 2);
    const WeightVector w = WeightVector::uniform(n);
    const auto rep =
        solve_phaseless_exact(e, PhaselessObservation((e.A * x0).cwiseAbs(), 0.0), w);
    CHECK(rep.objective <= weighted_l1(x0, w) + 1e-6 * (1 + weighted_l1(x0, w)));
  }
}

TEST_CASE("the exact solver dominates the heuristic") {
  Rng rng(227);
  int done = 0;
  for (int t = 0; done < 40 && t < 200; ++t) {
    const int n = rng.uniform_int(2, 6);
    const int m = rng.uniform_int(2, 10);
    const auto e = random_gaussian(rng, m, n);
    const Signal x0 = random_sparse(rng, n, 1 + n / 3);
    const WeightVector w = WeightVector::uniform(n);
    const double eps = 0.05 * (e.A * x0).norm();
    const PhaselessObservation obs((e.A * x0).cwiseAbs(), eps);
    const auto exact = solve_phaseless_exact(e, obs, w);
    const auto heur = solve_phaseless_altmin(e, obs, w, altmin_default_init(e, obs), 30);
    CHECK(heur.objective >= exact.objective - 1e-6 * (1 + exact.objective));
    ++done;
  }
  CHECK(done == 40);
}

TEST_CASE("every reported solution reproduces the magnitudes") {
  Rng rng(229);
  for (int t = 0; t < 20; ++t) {
    const int n = rng.uniform_int(2, 5);
    const int m = rng.uniform_int(1, 7);
    const auto e = random_gaussian(rng, m, n);
    const Signal x0 = random_sparse(rng, n, 1 + n / 2);
    const double eps = t % 2 == 0 ? 0.0 : 0.1;
    const Vector y = (e.A * x0).cwiseAbs();
    const auto rep = solve_phaseless_exact(e, PhaselessObservation(y, eps),
                                           WeightVector::uniform(n));
    for (const Signal& sol : rep.solutions)
      CHECK(((e.A * sol).cwiseAbs() - y).norm() <= eps + 1e-7 * (1 + y.norm()));
  }
}

TEST_CASE("permuting rows and magnitudes together changes nothing") {
  Rng rng(233);
  for (int t = 0; t < 10; ++t) {
    const int m = 5, n = 3;
    const auto e = random_gaussian(rng, m, n);
    const Signal x0 = random_sparse(rng, n, 2);
    const Vector y = (e.A * x0).cwiseAbs();
    std::vector<int> perm = {4, 2, 0, 3, 1};
    Matrix pa(m, n);
    Vector py(m);
    for (int i = 0; i < m; ++i) {
      pa.row(i) = e.A.row(perm[i]);
      py[i] = y[perm[i]];
    }
    const WeightVector w = WeightVector::uniform(n);
    const auto base = solve_phaseless_exact(e, PhaselessObservation(y, 0.0), w);
    const auto permuted = solve_phaseless_exact(MeasurementEnsemble(std::move(pa)),
                                                PhaselessObservation(py, 0.0), w);
    CHECK(base.objective == doctest::Approx(permuted.objective).epsilon(1e-9));
    REQUIRE(base.solutions.size() == permuted.solutions.size());
    for (const Signal& sol : base.solutions)
      CHECK(contains_class(permuted.solutions, sol, 1e-6));
  }
}
