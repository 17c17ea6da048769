#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "coalsens/estimators.hpp"
#include "coalsens/input_models.hpp"
#include "coalsens/models.hpp"

using namespace coalsens;

namespace {

constexpr double kPi = 3.14159265358979323846;

InputModel uniform_cube() {
  const Marginal u = Marginal::uniform(-kPi, kPi);
  return InputModel::independent({u, u, u});
}

InputModel standard_normals(int d) {
  return InputModel::independent(std::vector<Marginal>(d, Marginal::normal(0.0, 1.0)));
}

EstimatorBudget budget(int n_outer, int n_inner, std::uint64_t seed, int n_ref = 1000) {
  EstimatorBudget b;
  b.n_outer = n_outer;
  b.n_inner = n_inner;
  b.n_ref = n_ref;
  b.seed = seed;
  return b;
}

}  // namespace

TEST_CASE("budget and qoi validation") {
  CHECK_THROWS_AS(budget(1, 2, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(budget(2, 1, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(budget(2, 2, 0, 1).validate(), std::invalid_argument);

  QoISpec variance;
  variance.coordinate = 1;
  CHECK_THROWS_AS(variance.check_compatible(1), std::invalid_argument);
  QoISpec covariance;
  covariance.kind = QoISpec::Kind::Covariance;
  covariance.pair_p = 0;
  covariance.pair_q = 1;
  CHECK_THROWS_AS(covariance.check_compatible(1), std::invalid_argument);
  CHECK_NOTHROW(covariance.check_compatible(2));
  CHECK(QoISpec{}.name() == "variance");
}

TEST_CASE("empty coalition estimates are exactly zero") {
  const Model model = Model::linear({1.0, 1.0});
  const InputModel inputs = standard_normals(2);
  const EstimatorBudget b = budget(50, 10, 3);

  const PhiEstimate variance = estimate_phi_variance(model, inputs, 0, b);
  CHECK(variance.value.scalar() == 0.0);
  CHECK(variance.std_error.scalar() == 0.0);

  const Model sd = Model::sum_diff();
  const PhiEstimate matrix = estimate_phi_covmatrix(sd, inputs, 0, b);
  CHECK(matrix.value.matrix().max_abs() == 0.0);
  CHECK(matrix.std_error.matrix().max_abs() == 0.0);

  KernelSpec kernel;
  kernel.bandwidth = 1.0;
  const PhiEstimate mmd = estimate_phi_mmd(model, inputs, 0, kernel, b);
  CHECK(mmd.value.scalar() == 0.0);
  CHECK(mmd.std_error.scalar() == 0.0);
}

TEST_CASE("conditional mean table tracks the additive structure") {
  const Model model = Model::linear({1.0, 1.0});
  const InputModel inputs = InputModel::independent(
      {Marginal::uniform(0.0, 1.0), Marginal::uniform(0.0, 1.0)});
  const EstimatorBudget b = budget(50, 200, 11);
  const ConditionalMoments table = estimate_conditional_mean_table(model, inputs, 0b01, b);
  REQUIRE(table.n_outer == 50);
  REQUIRE(table.k == 1);

  // Reconstruct the outer points the estimator conditioned on.
  const SampleBlock outer =
      inputs.sample_joint(b.n_outer, rng::derive_seed(b.seed, rng::Stream::Outer, 0b01, 0));
  const double sd_x2 = std::sqrt(1.0 / 12.0);
  for (int j = 0; j < table.n_outer; ++j) {
    const double expected = outer.at(j, 0) + 0.5;  // x1 + E[X2]
    CHECK(std::abs(table.means[j] - expected) < 6.0 * sd_x2 / std::sqrt(200.0));
    // Inner variance estimates Var(X2) = 1/12.
    CHECK(table.inner_cov[j] == doctest::Approx(1.0 / 12.0).epsilon(0.5));
  }

  CHECK_THROWS_AS(estimate_conditional_mean_table(model, inputs, 0b00, b),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_conditional_mean_table(model, inputs, 0b11, b),
                  std::invalid_argument);
}

TEST_CASE("ishigami first-order effect of X2 within three std errors") {
  const Model model = Model::ishigami(7.0, 0.1);
  const PhiEstimate est =
      estimate_phi_variance(model, uniform_cube(), 0b010, budget(2000, 200, 42));
  CHECK(std::abs(est.value.scalar() - 6.125) < 3.0 * est.std_error.scalar());
  CHECK(est.std_error.scalar() > 0.0);
  CHECK(est.budget.n_outer == 2000);
}

TEST_CASE("correlated gaussian linear model within three std errors") {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.5, 0.5, 1.0;
  const InputModel inputs = InputModel::gaussian(Eigen::VectorXd::Zero(2), cov);
  const Model model = Model::linear({1.0, 1.0});
  const PhiEstimate est = estimate_phi_variance(model, inputs, 0b01, budget(2000, 200, 7));
  CHECK(std::abs(est.value.scalar() - 2.25) < 3.0 * est.std_error.scalar());
}

TEST_CASE("top estimate is the plain sample variance of the joint draw") {
  const Model model = Model::linear({1.0});
  const InputModel inputs = standard_normals(1);
  const PhiEstimate est = estimate_phi_variance(model, inputs, 0b1, budget(100, 50, 5));
  CHECK(std::abs(est.value.scalar() - 1.0) < 4.0 * est.std_error.scalar());
}

TEST_CASE("covariance estimates for the sum/difference model") {
  const Model model = Model::sum_diff();
  const InputModel inputs = standard_normals(2);
  const EstimatorBudget b = budget(2000, 200, 21);

  // Cov(E[X1+X2|X1], E[X1-X2|X1]) = Var(X1) = +1.
  const PhiEstimate plus = estimate_phi_covariance(model, inputs, 0b01, 0, 1, b);
  CHECK(std::abs(plus.value.scalar() - 1.0) < 3.0 * plus.std_error.scalar());
  // Cov(E[.|X2], E[.|X2]) = Cov(X2, -X2) = -1.
  const PhiEstimate minus = estimate_phi_covariance(model, inputs, 0b10, 0, 1, b);
  CHECK(std::abs(minus.value.scalar() + 1.0) < 3.0 * minus.std_error.scalar());

  // Swapping the pair is bit-exact by packed-triangle construction.
  const PhiEstimate swapped = estimate_phi_covariance(model, inputs, 0b01, 1, 0, b);
  CHECK(swapped.value.scalar() == plus.value.scalar());
  CHECK(swapped.std_error.scalar() == plus.std_error.scalar());
}

TEST_CASE("covariance matrix at the top subset") {
  const Model model = Model::sum_diff();
  const InputModel inputs = standard_normals(2);
  const PhiEstimate est = estimate_phi_covmatrix(model, inputs, 0b11, budget(2000, 200, 22));
  const SymMatrix& m = est.value.matrix();
  const SymMatrix& se = est.std_error.matrix();
  CHECK(std::abs(m(0, 0) - 2.0) < 3.0 * se(0, 0));
  CHECK(std::abs(m(1, 1) - 2.0) < 3.0 * se(1, 1));
  CHECK(std::abs(m(0, 1) - 0.0) < 3.0 * se(0, 1));
}

TEST_CASE("scalar estimators are bit-exact views of the matrix estimator") {
  const Model model = Model::sum_diff();
  const InputModel inputs = standard_normals(2);
  const EstimatorBudget b = budget(300, 50, 77);
  for (SubsetMask a = 0; a < 4; ++a) {
    const PhiEstimate matrix = estimate_phi_covmatrix(model, inputs, a, b);
    const PhiEstimate v0 = estimate_phi_variance(model, inputs, a, b, 0);
    const PhiEstimate v1 = estimate_phi_variance(model, inputs, a, b, 1);
    const PhiEstimate c01 = estimate_phi_covariance(model, inputs, a, 0, 1, b);
    CHECK(v0.value.scalar() == matrix.value.matrix()(0, 0));
    CHECK(v1.value.scalar() == matrix.value.matrix()(1, 1));
    CHECK(c01.value.scalar() == matrix.value.matrix()(0, 1));
    CHECK(v0.std_error.scalar() == matrix.std_error.matrix()(0, 0));
    CHECK(v1.std_error.scalar() == matrix.std_error.matrix()(1, 1));
    CHECK(c01.std_error.scalar() == matrix.std_error.matrix()(0, 1));
  }
}

TEST_CASE("law of total variance across conditioning levels") {
  const Model model = Model::ishigami(7.0, 0.1);
  const InputModel inputs = uniform_cube();
  const EstimatorBudget b = budget(1000, 100, 33);
  const PhiEstimate top = estimate_phi_variance(model, inputs, 0b111, b);

  for (SubsetMask a : {0b011u, 0b101u, 0b110u}) {
    const ConditionalMoments table = estimate_conditional_mean_table(model, inputs, a, b);
    // V = Var_j(m_j) + mean_j(v_j), with its outer-replicate std error.
    const int n = table.n_outer;
    double mbar = 0.0;
    for (int j = 0; j < n; ++j) mbar += table.means[j];
    mbar /= n;
    std::vector<double> t(n);
    for (int j = 0; j < n; ++j)
      t[j] = (table.means[j] - mbar) * (table.means[j] - mbar) + table.inner_cov[j];
    double total = 0.0;
    for (double v : t) total += v;
    total /= n;
    double ss = 0.0;
    for (double v : t) ss += (v - total) * (v - total);
    const double se = std::sqrt(ss / (n - 1) / n);

    const double combined =
        std::sqrt(se * se + top.std_error.scalar() * top.std_error.scalar());
    CHECK(std::abs(total - top.value.scalar()) < 5.0 * combined);
  }
}

TEST_CASE("estimates are deterministic given the seed") {
  const Model model = Model::ishigami(7.0, 0.1);
  const InputModel inputs = uniform_cube();
  const EstimatorBudget b = budget(100, 20, 9);
  const PhiEstimate first = estimate_phi_variance(model, inputs, 0b011, b);
  const PhiEstimate second = estimate_phi_variance(model, inputs, 0b011, b);
  CHECK(first.value.scalar() == second.value.scalar());
  CHECK(first.std_error.scalar() == second.std_error.scalar());

  const PhiEstimate other_seed = estimate_phi_variance(model, inputs, 0b011, budget(100, 20, 10));
  CHECK(first.value.scalar() != other_seed.value.scalar());
}

TEST_CASE("oracle agreement across 100 seeds: ishigami") {
  const Model model = Model::ishigami(7.0, 0.1);
  const InputModel inputs = uniform_cube();
  for (SubsetMask a = 0; a < 8; ++a) {
    const double oracle = *oracle_variance_phi(model, inputs, a);
    int hits = 0;
    for (int seed = 0; seed < 100; ++seed) {
      const PhiEstimate est = estimate_phi_variance(model, inputs, a, budget(400, 50, seed));
      if (a == 0) {
        hits += est.value.scalar() == 0.0;
      } else {
        hits += std::abs(est.value.scalar() - oracle) <= 4.0 * est.std_error.scalar();
      }
    }
    CHECK(hits >= 95);
  }
}

TEST_CASE("oracle agreement across 100 seeds: correlated gaussian linear") {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.5, 0.5, 1.0;
  const InputModel inputs = InputModel::gaussian(Eigen::VectorXd::Zero(2), cov);
  const Model model = Model::linear({1.0, 1.0});
  for (SubsetMask a = 1; a < 4; ++a) {
    const double oracle = *oracle_variance_phi(model, inputs, a);
    int hits = 0;
    for (int seed = 0; seed < 100; ++seed) {
      const PhiEstimate est = estimate_phi_variance(model, inputs, a, budget(400, 50, seed));
      hits += std::abs(est.value.scalar() - oracle) <= 4.0 * est.std_error.scalar();
    }
    CHECK(hits >= 95);
  }
}

TEST_CASE("bandwidth resolution") {
  KernelSpec heuristic;
  // Two 1-D points at distance 2.
  CHECK(resolve_bandwidth({0.0, 2.0}, 1, heuristic) == doctest::Approx(2.0));
  // Explicit bandwidth passes through.
  KernelSpec fixed;
  fixed.bandwidth = 0.5;
  CHECK(resolve_bandwidth({0.0, 2.0}, 1, fixed) == 0.5);
  // Median pairwise |N(0,1) - N(0,1)| distance is about 0.954.
  rng::Generator gen(202406);
  std::vector<double> outputs(1000);
  for (double& y : outputs) y = gen.normal();
  const double h = resolve_bandwidth(outputs, 1, heuristic);
  CHECK(h > 0.85);
  CHECK(h < 1.05);
  // Degenerate sample.
  CHECK_THROWS_AS(resolve_bandwidth({1.0, 1.0, 1.0}, 1, heuristic), std::invalid_argument);
}

TEST_CASE("mmd reference preparation is deterministic and reusable") {
  const Model model = Model::linear({1.0, 0.0});
  const InputModel inputs = standard_normals(2);
  KernelSpec kernel;  // median heuristic
  const EstimatorBudget b = budget(60, 40, 12, 300);
  const MmdReference ref = prepare_mmd_reference(model, inputs, kernel, b);
  CHECK(ref.n == 300);
  CHECK(ref.bandwidth > 0.5);
  CHECK(ref.ref_ustat > 0.0);
  CHECK(ref.ref_ustat < 1.0);

  const PhiEstimate shared = estimate_phi_mmd(model, inputs, 0b10, ref, b);
  const PhiEstimate convenience = estimate_phi_mmd(model, inputs, 0b10, kernel, b);
  CHECK(shared.value.scalar() == convenience.value.scalar());
  CHECK(shared.std_error.scalar() == convenience.std_error.scalar());
}

TEST_CASE("mmd of an irrelevant input is zero within noise") {
  // G(X) = X1 with X1 independent of X2: conditioning on X2 changes nothing.
  const Model model = Model::linear({1.0, 0.0});
  const InputModel inputs = standard_normals(2);
  KernelSpec kernel;
  const EstimatorBudget b = budget(200, 100, 8, 400);
  const MmdReference ref = prepare_mmd_reference(model, inputs, kernel, b);
  const PhiEstimate est = estimate_phi_mmd(model, inputs, 0b10, ref, b);
  CHECK(std::abs(est.value.scalar()) < 3.0 * est.std_error.scalar());
}

TEST_CASE("mmd outer averages are nonnegative within noise on all subsets") {
  const Model model = Model::linear({1.0, 0.0});
  const InputModel inputs = standard_normals(2);
  KernelSpec kernel;
  const EstimatorBudget b = budget(500, 60, 14, 300);
  const MmdReference ref = prepare_mmd_reference(model, inputs, kernel, b);
  for (SubsetMask a = 0; a < 4; ++a) {
    const PhiEstimate est = estimate_phi_mmd(model, inputs, a, ref, b);
    CHECK(est.value.scalar() >= -3.0 * est.std_error.scalar());
  }
}

TEST_CASE("mmd of a constant model vanishes for every subset") {
  const Model model = Model::constant(2, 3.0);
  const InputModel inputs = standard_normals(2);
  KernelSpec kernel;
  kernel.bandwidth = 1.0;  // the median heuristic would rightly reject this output
  const EstimatorBudget b = budget(30, 20, 4, 50);
  const MmdReference ref = prepare_mmd_reference(model, inputs, kernel, b);
  for (SubsetMask a = 0; a < 4; ++a) {
    const PhiEstimate est = estimate_phi_mmd(model, inputs, a, ref, b);
    CHECK(est.value.scalar() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }
  // And the median heuristic does reject it.
  KernelSpec heuristic;
  CHECK_THROWS_AS(prepare_mmd_reference(model, inputs, heuristic, b), std::invalid_argument);
}

TEST_CASE("mmd fully-explained input concentrates the effect") {
  // G(X) = X1: phi_{1} should equal phi_D (conditioning on X1 pins Y).
  const Model model = Model::linear({1.0, 0.0});
  const InputModel inputs = standard_normals(2);
  KernelSpec kernel;
  const EstimatorBudget b = budget(200, 100, 15, 400);
  const MmdReference ref = prepare_mmd_reference(model, inputs, kernel, b);
  const PhiEstimate x1 = estimate_phi_mmd(model, inputs, 0b01, ref, b);
  const PhiEstimate top = estimate_phi_mmd(model, inputs, 0b11, ref, b);
  const double combined = std::sqrt(x1.std_error.scalar() * x1.std_error.scalar() +
                                    top.std_error.scalar() * top.std_error.scalar());
  CHECK(std::abs(x1.value.scalar() - top.value.scalar()) < 4.0 * combined);
  CHECK(top.value.scalar() > 0.0);
}
