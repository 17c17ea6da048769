#include "coalsens/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "coalsens/input_models.hpp"
#include "coalsens/rng.hpp"

namespace coalsens {

namespace {

std::vector<double> evaluate_block(const Model& model, const SampleBlock& block) {
  const int k = model.output_dimension();
  std::vector<double> out(static_cast<std::size_t>(block.n) * k);
  for (int i = 0; i < block.n; ++i) {
    model.evaluate_into(block.row(i), std::span<double>(out.data() + static_cast<std::size_t>(i) * k, k));
  }
  return out;
}

/// Column means of an n x k row-major buffer.
std::vector<double> column_means(const std::vector<double>& y, int n, int k) {
  std::vector<double> mean(k, 0.0);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c) mean[c] += y[static_cast<std::size_t>(i) * k + c];
  for (int c = 0; c < k; ++c) mean[c] /= n;
  return mean;
}

/// Unbiased sample covariance, packed upper triangle, of an n x k buffer.
std::vector<double> packed_sample_cov(const std::vector<double>& y, int n, int k,
                                      const std::vector<double>& mean) {
  std::vector<double> cov(static_cast<std::size_t>(k) * (k + 1) / 2, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* row = y.data() + static_cast<std::size_t>(i) * k;
    std::size_t idx = 0;
    for (int p = 0; p < k; ++p) {
      const double dp = row[p] - mean[p];
      for (int q = p; q < k; ++q, ++idx) cov[idx] += dp * (row[q] - mean[q]);
    }
  }
  for (double& v : cov) v /= (n - 1);
  return cov;
}

double rbf(double dist2, double bandwidth) {
  return std::exp(-dist2 / (2.0 * bandwidth * bandwidth));
}

double squared_distance(const double* a, const double* b, int k) {
  double s = 0.0;
  for (int c = 0; c < k; ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  return s;
}

/// Mean and standard error (sd / sqrt(n)) of a sample.
std::pair<double, double> mean_and_se(const std::vector<double>& u) {
  const int n = static_cast<int>(u.size());
  double mean = 0.0;
  for (double v : u) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : u) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n))};
}

SymMatrix zero_matrix(int k) { return SymMatrix(k); }

}  // namespace

void EstimatorBudget::validate() const {
  if (n_outer < 2) throw std::invalid_argument("n_outer must be at least 2");
  if (n_inner < 2) throw std::invalid_argument("n_inner must be at least 2");
  if (n_ref < 2) throw std::invalid_argument("n_ref must be at least 2");
}

std::string QoISpec::name() const {
  switch (kind) {
    case Kind::Variance: return "variance";
    case Kind::Covariance: return "covariance";
    case Kind::CovarianceMatrix: return "covariance_matrix";
    case Kind::MeanMMD: return "mean_mmd";
  }
  throw std::logic_error("unreachable");
}

void QoISpec::check_compatible(int output_dim) const {
  switch (kind) {
    case Kind::Variance:
      if (coordinate < 0 || coordinate >= output_dim)
        throw std::invalid_argument("variance coordinate out of range for output dimension " +
                                    std::to_string(output_dim));
      break;
    case Kind::Covariance:
      if (pair_p < 0 || pair_p >= output_dim || pair_q < 0 || pair_q >= output_dim)
        throw std::invalid_argument("covariance pair out of range for output dimension " +
                                    std::to_string(output_dim));
      break;
    case Kind::CovarianceMatrix:
      break;
    case Kind::MeanMMD:
      if (kernel.bandwidth < 0.0)
        throw std::invalid_argument("kernel bandwidth must be nonnegative");
      break;
  }
}

ConditionalMoments estimate_conditional_mean_table(const Model& model,
                                                   const InputModel& inputs,
                                                   SubsetMask a,
                                                   const EstimatorBudget& budget) {
  budget.validate();
  const int d = model.input_dimension();
  const int k = model.output_dimension();
  if (a == 0 || a == subsets::full_mask(d))
    throw std::invalid_argument("conditional moments require a proper nonempty subset");

  // Outer conditioning points: joint draws projected onto A keeps them
  // distributed as the X_A marginal under every input-model type.
  const std::uint64_t outer_seed = rng::derive_seed(budget.seed, rng::Stream::Outer, a, 0);
  const SampleBlock outer = inputs.sample_joint(budget.n_outer, outer_seed);
  const std::vector<int> members = subsets::member_indices(a);
  const int na = static_cast<int>(members.size());

  ConditionalMoments table;
  table.n_outer = budget.n_outer;
  table.k = k;
  table.means.resize(static_cast<std::size_t>(budget.n_outer) * k);
  table.inner_cov.resize(static_cast<std::size_t>(budget.n_outer) * k * (k + 1) / 2);

  std::vector<double> x_a(na);
  for (int j = 0; j < budget.n_outer; ++j) {
    for (int i = 0; i < na; ++i) x_a[i] = outer.at(j, members[i]);
    const std::uint64_t inner_seed =
        rng::derive_seed(budget.seed, rng::Stream::Inner, a, static_cast<std::uint64_t>(j));
    const SampleBlock block =
        inputs.sample_conditional(a, x_a, budget.n_inner, inner_seed);
    const std::vector<double> y = evaluate_block(model, block);
    const std::vector<double> mean = column_means(y, budget.n_inner, k);
    const std::vector<double> cov = packed_sample_cov(y, budget.n_inner, k, mean);
    std::copy(mean.begin(), mean.end(), table.means.begin() + static_cast<std::size_t>(j) * k);
    std::copy(cov.begin(), cov.end(),
              table.inner_cov.begin() + static_cast<std::size_t>(j) * cov.size());
  }
  return table;
}

namespace {

/// Nested estimate from a precomputed moment table: outer covariance of the
/// inner means, debiased by the average inner covariance / n_inner. Standard
/// errors come from the outer spread of per-point pseudo-values.
PhiEstimate covmatrix_from_table(const ConditionalMoments& table,
                                 const EstimatorBudget& budget) {
  const int n_inner = budget.n_inner;
  const int n = table.n_outer;
  const int k = table.k;
  const std::size_t nch = static_cast<std::size_t>(k) * (k + 1) / 2;
  const std::vector<double> mbar = column_means(table.means, n, k);

  SymMatrix value(k), se(k);
  std::vector<double> u(n);
  std::size_t idx = 0;
  for (int p = 0; p < k; ++p) {
    for (int q = p; q < k; ++q, ++idx) {
      for (int j = 0; j < n; ++j) {
        const double* m = table.means.data() + static_cast<std::size_t>(j) * k;
        const double cj = table.inner_cov[static_cast<std::size_t>(j) * nch + idx];
        u[j] = (m[p] - mbar[p]) * (m[q] - mbar[q]) - cj / n_inner;
      }
      // Unbiased combination: n/(n-1) on the outer product term only.
      double prod = 0.0, bias = 0.0;
      for (int j = 0; j < n; ++j) {
        const double* m = table.means.data() + static_cast<std::size_t>(j) * k;
        prod += (m[p] - mbar[p]) * (m[q] - mbar[q]);
        bias += table.inner_cov[static_cast<std::size_t>(j) * nch + idx];
      }
      const double phi = prod / (n - 1) - bias / n / n_inner;
      const auto [umean, use] = mean_and_se(u);
      (void)umean;
      value.set(p, q, phi);
      se.set(p, q, use);
    }
  }
  return {RingValue(std::move(value)), RingValue(std::move(se)), budget};
}

/// A = D: the conditional law is a point mass, so the estimand is the plain
/// output covariance. One joint block of n_outer * n_inner draws.
PhiEstimate covmatrix_full(const Model& model, const InputModel& inputs,
                           const EstimatorBudget& budget) {
  const int d = model.input_dimension();
  const int k = model.output_dimension();
  const int n = budget.n_outer * budget.n_inner;
  const std::uint64_t seed =
      rng::derive_seed(budget.seed, rng::Stream::Joint, subsets::full_mask(d), 0);
  const SampleBlock block = inputs.sample_joint(n, seed);
  const std::vector<double> y = evaluate_block(model, block);
  const std::vector<double> mean = column_means(y, n, k);

  SymMatrix value(k), se(k);
  std::vector<double> u(n);
  std::size_t idx = 0;
  for (int p = 0; p < k; ++p) {
    for (int q = p; q < k; ++q, ++idx) {
      for (int i = 0; i < n; ++i) {
        const double* row = y.data() + static_cast<std::size_t>(i) * k;
        u[i] = (row[p] - mean[p]) * (row[q] - mean[q]);
      }
      double ss = 0.0;
      for (double v : u) ss += v;
      value.set(p, q, ss / (n - 1));
      const auto [umean, use] = mean_and_se(u);
      (void)umean;
      se.set(p, q, use);
    }
  }
  return {RingValue(std::move(value)), RingValue(std::move(se)), budget};
}

}  // namespace

PhiEstimate estimate_phi_covmatrix(const Model& model, const InputModel& inputs,
                                   SubsetMask a, const EstimatorBudget& budget) {
  budget.validate();
  const int d = model.input_dimension();
  const int k = model.output_dimension();
  if (a == 0) {
    return {RingValue(zero_matrix(k)), RingValue(zero_matrix(k)), budget};
  }
  if (a == subsets::full_mask(d)) {
    return covmatrix_full(model, inputs, budget);
  }
  const ConditionalMoments table =
      estimate_conditional_mean_table(model, inputs, a, budget);
  return covmatrix_from_table(table, budget);
}

PhiEstimate estimate_phi_variance(const Model& model, const InputModel& inputs,
                                  SubsetMask a, const EstimatorBudget& budget,
                                  int coordinate) {
  // A view of the matrix estimator so scalar and matrix runs agree bit for
  // bit on shared entries.
  const PhiEstimate m = estimate_phi_covmatrix(model, inputs, a, budget);
  return {RingValue(m.value.matrix()(coordinate, coordinate)),
          RingValue(m.std_error.matrix()(coordinate, coordinate)), m.budget};
}

PhiEstimate estimate_phi_covariance(const Model& model, const InputModel& inputs,
                                    SubsetMask a, int p, int q,
                                    const EstimatorBudget& budget) {
  const PhiEstimate m = estimate_phi_covmatrix(model, inputs, a, budget);
  return {RingValue(m.value.matrix()(p, q)), RingValue(m.std_error.matrix()(p, q)), m.budget};
}

double resolve_bandwidth(const std::vector<double>& outputs, int k,
                         const KernelSpec& spec) {
  if (spec.bandwidth < 0.0) throw std::invalid_argument("kernel bandwidth must be nonnegative");
  if (!spec.median_heuristic()) return spec.bandwidth;

  const int n_total = static_cast<int>(outputs.size()) / k;
  const int m = std::min(n_total, 1000);
  if (m < 2) throw std::invalid_argument("median heuristic needs at least two outputs");

  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      dist.push_back(std::sqrt(squared_distance(outputs.data() + static_cast<std::size_t>(i) * k,
                                                outputs.data() + static_cast<std::size_t>(j) * k, k)));
  const std::size_t half = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + half, dist.end());
  double median = dist[half];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + half);
    median = 0.5 * (lower + median);
  }
  if (median <= 0.0)
    throw std::invalid_argument(
        "median heuristic failed: reference outputs are all identical");
  return median;
}

MmdReference prepare_mmd_reference(const Model& model, const InputModel& inputs,
                                   const KernelSpec& kernel,
                                   const EstimatorBudget& budget) {
  budget.validate();
  MmdReference ref;
  ref.n = budget.n_ref;
  ref.k = model.output_dimension();
  const std::uint64_t seed = rng::derive_seed(budget.seed, rng::Stream::Reference, 0, 0);
  const SampleBlock block = inputs.sample_joint(budget.n_ref, seed);
  ref.outputs = evaluate_block(model, block);
  ref.bandwidth = resolve_bandwidth(ref.outputs, ref.k, kernel);

  double acc = 0.0;
  for (int i = 0; i < ref.n; ++i)
    for (int j = i + 1; j < ref.n; ++j)
      acc += rbf(squared_distance(ref.outputs.data() + static_cast<std::size_t>(i) * ref.k,
                                  ref.outputs.data() + static_cast<std::size_t>(j) * ref.k, ref.k),
                 ref.bandwidth);
  ref.ref_ustat = 2.0 * acc / (static_cast<double>(ref.n) * (ref.n - 1));
  return ref;
}

namespace {

/// A = D: conditioning on all inputs collapses the conditional law to a point
/// mass, and the averaged squared MMD reduces to E k(Y,Y) - E k(Y,Y'). With a
/// unit-diagonal kernel that is 1 minus the V-statistic of the reference
/// sample; the delta-method standard error uses the per-point embedding means.
PhiEstimate mmd_full(const MmdReference& ref, const EstimatorBudget& budget) {
  const int m = ref.n;
  std::vector<double> mu_hat(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j)
      acc += rbf(squared_distance(ref.outputs.data() + static_cast<std::size_t>(i) * ref.k,
                                  ref.outputs.data() + static_cast<std::size_t>(j) * ref.k, ref.k),
                 ref.bandwidth);
    mu_hat[i] = acc / m;
  }
  const auto [vstat, mu_se] = mean_and_se(mu_hat);
  return {RingValue(1.0 - vstat), RingValue(2.0 * mu_se), budget};
}

}  // namespace

PhiEstimate estimate_phi_mmd(const Model& model, const InputModel& inputs,
                             SubsetMask a, const MmdReference& reference,
                             const EstimatorBudget& budget) {
  budget.validate();
  const int d = model.input_dimension();
  const int k = model.output_dimension();
  if (a == 0) {
    // Conditioning on nothing leaves the marginal law: the MMD is exactly 0.
    return {RingValue(0.0), RingValue(0.0), budget};
  }
  if (a == subsets::full_mask(d)) {
    return mmd_full(reference, budget);
  }

  const std::uint64_t outer_seed = rng::derive_seed(budget.seed, rng::Stream::Outer, a, 0);
  const SampleBlock outer = inputs.sample_joint(budget.n_outer, outer_seed);
  const std::vector<int> members = subsets::member_indices(a);
  const int na = static_cast<int>(members.size());
  const int ni = budget.n_inner;

  std::vector<double> x_a(na);
  std::vector<double> mmd2(budget.n_outer);
  std::vector<double> cbar(reference.n, 0.0);  // mean embedding at each reference point
  for (int j = 0; j < budget.n_outer; ++j) {
    for (int i = 0; i < na; ++i) x_a[i] = outer.at(j, members[i]);
    const std::uint64_t inner_seed =
        rng::derive_seed(budget.seed, rng::Stream::Inner, a, static_cast<std::uint64_t>(j));
    const SampleBlock block = inputs.sample_conditional(a, x_a, ni, inner_seed);
    const std::vector<double> z = evaluate_block(model, block);

    double within = 0.0;
    for (int p = 0; p < ni; ++p)
      for (int q = p + 1; q < ni; ++q)
        within += rbf(squared_distance(z.data() + static_cast<std::size_t>(p) * k,
                                       z.data() + static_cast<std::size_t>(q) * k, k),
                      reference.bandwidth);
    double cross = 0.0;
    for (int r = 0; r < reference.n; ++r) {
      double row = 0.0;
      for (int p = 0; p < ni; ++p)
        row += rbf(squared_distance(reference.outputs.data() + static_cast<std::size_t>(r) * k,
                                    z.data() + static_cast<std::size_t>(p) * k, k),
                   reference.bandwidth);
      cross += row;
      cbar[r] += row;
    }
    // Unbiased two-sample squared-MMD U-statistic against the reference.
    mmd2[j] = reference.ref_ustat + 2.0 * within / (static_cast<double>(ni) * (ni - 1)) -
              2.0 * cross / (static_cast<double>(reference.n) * ni);
  }
  const auto [mean, se_outer] = mean_and_se(mmd2);

  // The across-outer spread misses the noise of the one shared reference
  // draw. Its first-order part cancels between the reference U-statistic and
  // the cross term because the outer mixture of conditional laws reproduces
  // the marginal law. What survives is the degenerate part of the reference
  // U-statistic, with variance 2 E[h^2] / (n (n - 1)) for the doubly centered
  // kernel h(y, y') = k(y, y') - mu(y) - mu(y') + E[mu]; the embeddings mu
  // are estimated from the samples already drawn against each reference point.
  double se_ref = 0.0;
  if (reference.n >= 2) {
    const double scale = 1.0 / (static_cast<double>(ni) * budget.n_outer);
    std::vector<double> mu_hat(reference.n);
    double m0_hat = 0.0;
    for (int r = 0; r < reference.n; ++r) {
      mu_hat[r] = cbar[r] * scale;
      m0_hat += mu_hat[r];
    }
    m0_hat /= reference.n;
    double acc = 0.0;
    for (int r = 0; r < reference.n; ++r)
      for (int s = r + 1; s < reference.n; ++s) {
        const double centered =
            rbf(squared_distance(reference.outputs.data() + static_cast<std::size_t>(r) * k,
                                 reference.outputs.data() + static_cast<std::size_t>(s) * k, k),
                reference.bandwidth) -
            mu_hat[r] - mu_hat[s] + m0_hat;
        acc += centered * centered;
      }
    const double pairs = 0.5 * static_cast<double>(reference.n) * (reference.n - 1);
    se_ref = std::sqrt(acc) / pairs;
  }
  const double se = std::sqrt(se_outer * se_outer + se_ref * se_ref);
  return {RingValue(mean), RingValue(se), budget};
}

PhiEstimate estimate_phi_mmd(const Model& model, const InputModel& inputs,
                             SubsetMask a, const KernelSpec& kernel,
                             const EstimatorBudget& budget) {
  const MmdReference ref = prepare_mmd_reference(model, inputs, kernel, budget);
  return estimate_phi_mmd(model, inputs, a, ref, budget);
}

}  // namespace coalsens
