#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coalsens/models.hpp"
#include "coalsens/ring.hpp"
#include "coalsens/subset.hpp"

namespace coalsens {

/// Monte Carlo sample sizes. n_outer conditioning points, n_inner conditional
/// draws per point, n_ref marginal reference outputs (MMD only).
struct EstimatorBudget {
  int n_outer = 2000;
  int n_inner = 200;
  int n_ref = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// RBF kernel configuration. A zero bandwidth requests the median heuristic,
/// resolved once per experiment on the marginal output sample and then held
/// fixed across every subset so MMD values stay comparable.
struct KernelSpec {
  double bandwidth = 0.0;  // 0 = median heuristic
  bool median_heuristic() const { return bandwidth == 0.0; }
};

/// Which parameter of interest is decomposed.
struct QoISpec {
  enum class Kind { Variance, Covariance, CovarianceMatrix, MeanMMD };

  Kind kind = Kind::Variance;
  int coordinate = 0;          // Variance: 0-based output coordinate
  int pair_p = 0, pair_q = 1;  // Covariance: 0-based output pair
  KernelSpec kernel;           // MeanMMD

  bool scalar_valued() const { return kind != Kind::CovarianceMatrix; }
  std::string name() const;
  /// Throws std::invalid_argument when the QoI cannot apply to a model with
  /// output dimension k.
  void check_compatible(int output_dim) const;
};

/// A single estimated table entry with its outer-replicate standard error.
struct PhiEstimate {
  RingValue value;
  RingValue std_error;
  EstimatorBudget budget;
};

/// Per-outer-point conditional moments: for each of n_outer draws
/// x_A^(j) ~ P_{X_A}, the inner-sample mean vector and unbiased inner
/// covariance (packed upper triangle) of G over n_inner conditional draws.
struct ConditionalMoments {
  int n_outer = 0;
  int k = 0;
  std::vector<double> means;      // n_outer x k, row-major
  std::vector<double> inner_cov;  // n_outer x k(k+1)/2, row-major packed
};

/// First stage of the nested estimator for a proper nonempty subset A.
ConditionalMoments estimate_conditional_mean_table(const Model& model,
                                                   const InputModel& inputs,
                                                   SubsetMask a,
                                                   const EstimatorBudget& budget);

/// Bias-corrected nested estimate of the conditional-mean covariance matrix
///   Sigma^A_{pq} = Cov(E[G_p | X_A], E[G_q | X_A]):
/// outer covariance of the inner means minus mean inner covariance / n_inner.
/// Boundary cases are analytic: A = empty is exactly zero, A = D is the plain
/// sample covariance over n_outer * n_inner joint draws. The variance and
/// covariance estimators below are entry views of this shared computation,
/// which is what makes their agreement with the matrix QoI bit-exact.
PhiEstimate estimate_phi_covmatrix(const Model& model, const InputModel& inputs,
                                   SubsetMask a, const EstimatorBudget& budget);

/// Var[E[G_c(X) | X_A]] for one output coordinate (default the first).
PhiEstimate estimate_phi_variance(const Model& model, const InputModel& inputs,
                                  SubsetMask a, const EstimatorBudget& budget,
                                  int coordinate = 0);

/// Cov(E[G_p | X_A], E[G_q | X_A]) for an output pair.
PhiEstimate estimate_phi_covariance(const Model& model, const InputModel& inputs,
                                    SubsetMask a, int p, int q,
                                    const EstimatorBudget& budget);

/// Median-heuristic bandwidth: the median pairwise Euclidean distance among
/// min(n, 1000) reference outputs. An explicit bandwidth passes through
/// unchanged. Rejects an all-identical sample (zero median distance).
double resolve_bandwidth(const std::vector<double>& outputs, int k,
                         const KernelSpec& spec);

/// Shared MMD state: the marginal reference output sample, the resolved
/// bandwidth and the reference-only U-statistic term.
struct MmdReference {
  std::vector<double> outputs;  // n_ref x k, row-major
  int n = 0;
  int k = 0;
  double bandwidth = 0.0;
  double ref_ustat = 0.0;  // (2 / m(m-1)) sum_{i<j} k(y_i, y_j)
};

MmdReference prepare_mmd_reference(const Model& model, const InputModel& inputs,
                                   const KernelSpec& kernel,
                                   const EstimatorBudget& budget);

/// Mean squared MMD between the marginal output law and the conditional law
/// given X_A, averaged over X_A. Per outer point the unbiased two-sample
/// U-statistic is used; A = empty is exactly zero and A = D reduces to
/// E[k(Y,Y)] - E[mu(Y)] with a V-statistic for the embedding term.
PhiEstimate estimate_phi_mmd(const Model& model, const InputModel& inputs,
                             SubsetMask a, const MmdReference& reference,
                             const EstimatorBudget& budget);

/// Convenience overload that draws its own reference sample (bit-identical
/// to prepare_mmd_reference + the overload above for the same seed).
PhiEstimate estimate_phi_mmd(const Model& model, const InputModel& inputs,
                             SubsetMask a, const KernelSpec& kernel,
                             const EstimatorBudget& budget);

}  // namespace coalsens
