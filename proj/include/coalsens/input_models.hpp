#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coalsens/rng.hpp"
#include "coalsens/subset.hpp"

namespace coalsens {

/// One-dimensional marginal distribution. The three supported families all
/// have closed-form quantile functions, which keeps conditional sampling
/// through the Gaussian copula exact.
class Marginal {
 public:
  enum class Family { Uniform, Normal, Triangular };

  static Marginal uniform(double lo, double hi);
  static Marginal normal(double mean, double sd);
  static Marginal triangular(double lo, double mode, double hi);

  Family family() const { return family_; }
  double cdf(double x) const;
  double quantile(double u) const;  // u in (0, 1)
  double sample(rng::Generator& gen) const;
  double mean() const;
  double variance() const;
  bool in_support(double x) const;
  std::string describe() const;

 private:
  Marginal(Family family, double p1, double p2, double p3)
      : family_(family), p1_(p1), p2_(p2), p3_(p3) {}

  Family family_;
  double p1_, p2_, p3_;  // uniform: lo,hi,-; normal: mean,sd,-; tri: lo,mode,hi
};

/// n joint draws laid out row-major (n x d), together with the seed that
/// produced them.
struct SampleBlock {
  int n = 0;
  int d = 0;
  std::uint64_t seed = 0;
  std::vector<double> data;

  double at(int row, int col) const { return data[static_cast<std::size_t>(row) * d + col]; }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * d, static_cast<std::size_t>(d)};
  }
};

/// Probabilistic input specification with exact marginal and conditional
/// sampling. Three families are supported, chosen because the conditional
/// distribution of the unpinned coordinates given a pinned coalition is
/// analytic for each: independent marginals, a multivariate Gaussian
/// (Schur-complement conditionals), and a Gaussian copula (conditioning in
/// the latent Gaussian space, pushed through the marginal quantiles).
class InputModel {
 public:
  enum class Type { IndependentMarginals, MultivariateGaussian, GaussianCopula };

  static InputModel independent(std::vector<Marginal> marginals);
  static InputModel gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  static InputModel gaussian_copula(Eigen::MatrixXd correlation,
                                    std::vector<Marginal> marginals);

  Type type() const { return type_; }
  int dimension() const { return d_; }
  std::string describe() const;

  /// Marginal families (independent and copula models only).
  const std::vector<Marginal>& marginals() const;
  /// Mean vector (multivariate Gaussian only).
  const Eigen::VectorXd& mean() const;
  /// Covariance (Gaussian) or latent correlation (copula).
  const Eigen::MatrixXd& covariance() const;

  /// n i.i.d. rows from the joint distribution; deterministic given seed.
  SampleBlock sample_joint(int n, std::uint64_t seed) const;

  /// n i.i.d. rows from the joint law with the coordinates in A pinned to
  /// x_A (given in ascending coordinate order) and the complement drawn from
  /// the exact conditional. A must be a nonempty proper subset; callers
  /// handle A = empty and A = D analytically.
  SampleBlock sample_conditional(SubsetMask a, std::span<const double> x_a, int n,
                                 std::uint64_t seed) const;

 private:
  InputModel() = default;

  void require_in_support(int coord, double x) const;
  double latent_from_value(int coord, double x) const;

  Type type_ = Type::IndependentMarginals;
  int d_ = 0;
  std::vector<Marginal> marginals_;  // independent + copula
  Eigen::VectorXd mean_;             // gaussian
  Eigen::MatrixXd cov_;              // gaussian: covariance; copula: correlation
  Eigen::MatrixXd chol_;             // lower Cholesky factor of cov_
};

}  // namespace coalsens
