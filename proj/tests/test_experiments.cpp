#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <vector>

#include "wsp/experiments.hpp"
#include "wsp/records.hpp"

using namespace wsp;

namespace {

ExperimentConfig showcase_config() {
  // the 3x2 uniqueness family with rows (1,0), (0,1), (1,1) is covered by
  // m = 3 Gaussian trials below; this fixture is the hand-certified N = 1 one
  ExperimentConfig cfg;
  cfg.name = "hand_certified";
  cfg.m = 3;
  cfg.n = 1;
  cfg.k = 2.0;
  cfg.matrix_family = MatrixFamily::OnesColumn;
  cfg.matrix_param = std::sqrt(0.4);
  cfg.noise_eps = 0.05;
  cfg.trials = 10;
  cfg.seed = 7;
  cfg.certify = true;
  return cfg;
}

} // namespace

TEST_CASE("gaussian matrices are seed deterministic") {
  const auto a = gen_gaussian_matrix(6, 4, 1234);
  const auto b = gen_gaussian_matrix(6, 4, 1234);
  CHECK((a.A - b.A).norm() == 0.0);
  CHECK(a.meta.generator == "gaussian");
  CHECK(a.meta.seed == 1234);
  const auto c = gen_gaussian_matrix(6, 4, 1235);
  CHECK((a.A - c.A).norm() > 0.0);
}

TEST_CASE("default variance 1/m concentrates column norms near one") {
  const auto e = gen_gaussian_matrix(200, 100, 5);
  double mean = 0.0;
  for (int j = 0; j < e.n(); ++j) mean += e.A.col(j).norm();
  mean /= e.n();
  CHECK(std::abs(mean - 1.0) <= 0.1);
}

TEST_CASE("orthonormal family has an exactly orthonormal Gram up to roundoff") {
  const auto e = gen_orthonormal_matrix(10, 5, 99);
  CHECK((e.A.transpose() * e.A - Matrix::Identity(5, 5)).norm() <= 1e-13);
  const auto e2 = gen_orthonormal_matrix(10, 5, 99);
  CHECK((e.A - e2.A).norm() == 0.0);
}

TEST_CASE("weighted sparse signals always fit the budget") {
  Eigen::VectorXd wraw(3);
  wraw << 2, 1, 1;
  const WeightVector w{wraw};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Signal x = gen_weighted_sparse_signal(w, 2.0, seed);
    CHECK(is_weighted_k_sparse(x, w, 2.0, 0.0));
    CHECK(x[0] == 0.0); // index 0 alone already needs w^2 = 4 > 2
    CHECK(x.cwiseAbs().maxCoeff() > 0.0);
  }
  CHECK_THROWS_AS(gen_weighted_sparse_signal(WeightVector::uniform(2, 2.0), 2.0, 1),
                  std::invalid_argument);
}

TEST_CASE("compressible signals decay as promised") {
  const Signal x = gen_compressible_signal(8, 3, 1.5);
  std::vector<double> mags(8);
  for (int i = 0; i < 8; ++i) mags[i] = std::abs(x[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  for (int j = 0; j < 8; ++j)
    CHECK(mags[j] == doctest::Approx(std::pow(j + 1.0, -1.5)).epsilon(1e-12));
}

TEST_CASE("generated noise never leaves the ball") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const Vector e = gen_noise_in_ball(6, 0.25, seed);
    CHECK(e.norm() <= 0.25);
  }
  CHECK(gen_noise_in_ball(4, 0.0, 9).norm() == 0.0);
}

TEST_CASE("trials are reproducible record for record") {
  ExperimentConfig cfg;
  cfg.m = 6;
  cfg.n = 4;
  cfg.k = 2.0;
  cfg.trials = 5;
  cfg.seed = 31;
  const auto a = run_trials(cfg);
  const auto b = run_trials(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed_derived == b[i].seed_derived);
    CHECK(a[i].error == b[i].error);
    CHECK(a[i].objective == b[i].objective);
    CHECK(a[i].success == b[i].success);
  }
}

TEST_CASE("noiseless exact trials on a well-posed family recover the truth") {
  ExperimentConfig cfg;
  cfg.m = 8;
  cfg.n = 4;
  cfg.k = 2.0;
  cfg.trials = 10;
  cfg.seed = 17;
  cfg.success_tol = 1e-6;
  const auto records = run_trials(cfg);
  int good = 0;
  for (const auto& r : records) {
    CHECK(r.solver_status == "ok");
    if (r.success) ++good;
  }
  CHECK(good >= 9);
}

TEST_CASE("the hand-certified odd-m family passes its own bound") {
  const auto records = run_trials(showcase_config());
  for (const auto& r : records) {
    REQUIRE(r.solver_status == "ok");
    REQUIRE(r.certificate_pass.has_value());
    CHECK(*r.certificate_pass);
    REQUIRE(r.bound_rhs.has_value());
    CHECK(r.error <= *r.bound_rhs + 1e-8);
  }
}

TEST_CASE("bound verification summarizes certified trials with zero violations") {
  ExperimentConfig cfg = showcase_config();
  cfg.trials = 20;
  const BoundSummary summary = bound_verification(cfg);
  CHECK(summary.trials == 20);
  CHECK(summary.certified == 20);
  CHECK(summary.violations == 0);
  CHECK(summary.vacuous == 0);

  // orthonormal columns, linear model: delta = 0 exactly (up to roundoff)
  ExperimentConfig lin;
  lin.m = 10;
  lin.n = 5;
  lin.k = 4.0;
  lin.model = MeasurementModel::Linear;
  lin.matrix_family = MatrixFamily::Orthonormal;
  lin.noise_eps = 0.1;
  lin.trials = 10;
  lin.seed = 23;
  const BoundSummary lsum = bound_verification(lin);
  CHECK(lsum.certified == 10);
  CHECK(lsum.violations == 0);
}

TEST_CASE("phase transition tables and the single-magnitude failure mode") {
  ExperimentConfig cfg;
  cfg.n = 6;
  cfg.k = 2.0;
  cfg.trials = 50;
  cfg.seed = 2024;
  cfg.m_grid = {10};
  auto cells = phase_transition(cfg);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].success_rate >= 0.9);

  ExperimentConfig tiny;
  tiny.n = 2;
  tiny.k = 2.0;
  tiny.m = 1;
  tiny.trials = 40;
  tiny.seed = 2025;
  auto fail_cells = phase_transition(tiny);
  REQUIRE(fail_cells.size() == 1);
  CHECK(fail_cells[0].success_rate <= 0.1);
}

TEST_CASE("support-aligned weights do not hurt the success rate") {
  // truth always lives on {0, 1}; the weighted run downweights exactly there
  ExperimentConfig uniform;
  uniform.n = 6;
  uniform.k = 2.0;
  uniform.m = 5;
  uniform.trials = 200;
  uniform.seed = 555;
  uniform.signal_weights =
      WeightSpec{WeightProfile::Explicit, 1.0, 1.0, 2.0, 0, {1, 1, 3, 3, 3, 3}};

  ExperimentConfig weighted = uniform;
  weighted.weights = WeightSpec{WeightProfile::TwoLevel, 1.0, 1.0, 3.0, 2};

  double uniform_rate = 0.0, weighted_rate = 0.0;
  for (const auto& r : run_trials(uniform)) uniform_rate += r.success ? 1 : 0;
  for (const auto& r : run_trials(weighted)) weighted_rate += r.success ? 1 : 0;
  uniform_rate /= uniform.trials;
  weighted_rate /= weighted.trials;
  CHECK(weighted_rate >= uniform_rate - 0.02);
}

TEST_CASE("CSV emission is deterministic and respects the runtime switch") {
  ExperimentConfig cfg;
  cfg.m = 5;
  cfg.n = 3;
  cfg.k = 1.0;
  cfg.trials = 4;
  cfg.seed = 77;
  const auto a = trials_to_csv(run_trials(cfg), false);
  const auto b = trials_to_csv(run_trials(cfg), false);
  CHECK(a == b);
  CHECK(a.find("runtime") == std::string::npos);
  const auto c = trials_to_csv(run_trials(cfg), true);
  CHECK(c.find("runtime_ms") != std::string::npos);

  const auto cells = phase_transition(cfg);
  CHECK(phase_table_to_csv(cells, false) == phase_table_to_csv(cells, false));
}

TEST_CASE("solver failures are recorded, not thrown") {
  ExperimentConfig cfg;
  cfg.m = 20; // beyond the pattern cap of 16
  cfg.n = 3;
  cfg.k = 1.0;
  cfg.trials = 1;
  const auto records = run_trials(cfg);
  REQUIRE(records.size() == 1);
  CHECK(records[0].solver_status != "ok");
  CHECK_FALSE(records[0].success);
}

TEST_CASE("config validation rejects nonsense") {
  ExperimentConfig cfg;
  cfg.trials = 0;
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);
  cfg.trials = 1;
  cfg.k = 0.0;
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);
  cfg.k = 1.0;
  cfg.matrix_family = MatrixFamily::OnesColumn;
  cfg.n = 2;
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);
}
