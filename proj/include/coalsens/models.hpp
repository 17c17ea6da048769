#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coalsens/input_models.hpp"
#include "coalsens/subset.hpp"

namespace coalsens {

/// Deterministic benchmark model G : R^d -> R^k. The registry is static:
/// models are selected by name with numeric parameters, which keeps the
/// acceptance oracles hermetic.
class Model {
 public:
  using EvalFn = std::function<void(std::span<const double>, std::span<double>)>;

  Model(std::string name, int input_dim, int output_dim, EvalFn eval,
        std::vector<double> params = {});

  const std::string& name() const { return name_; }
  int input_dimension() const { return d_; }
  int output_dimension() const { return k_; }
  const std::vector<double>& params() const { return params_; }

  /// G(x); pure. Throws on dimension mismatch.
  std::vector<double> evaluate(std::span<const double> x) const;
  void evaluate_into(std::span<const double> x, std::span<double> out) const;

  // Registry -------------------------------------------------------------

  /// Ishigami: sin(x1) + a sin^2(x2) + b x3^4 sin(x1); d=3, k=1.
  static Model ishigami(double a, double b);
  /// Linear form beta . x; k=1.
  static Model linear(std::vector<double> beta);
  /// Bivariate (x1 + x2, x1 - x2); d=2, k=2.
  static Model sum_diff();
  /// Constant output; useful for degenerate-QoI edge cases.
  static Model constant(int input_dim, double value);

  static const std::vector<std::string>& registry_names();

 private:
  std::string name_;
  int d_;
  int k_;
  EvalFn eval_;
  std::vector<double> params_;
};

/// Closed-form phi_A = Var[E[G(X) | X_A]] for the registered (model, inputs)
/// oracle pairs:
///   - linear model + multivariate Gaussian inputs (projection variance),
///   - linear model + independent marginals (additive partial variances),
///   - Ishigami + independent uniform(-pi, pi)^3 (analytic partial variances).
/// Returns nullopt when no closed form is registered for the pair.
std::optional<double> oracle_variance_phi(const Model& model, const InputModel& inputs,
                                          SubsetMask a);

/// Total output variance of the Ishigami function over uniform(-pi, pi)^3:
/// a^2/8 + b pi^4/5 + b^2 pi^8/18 + 1/2. Constants are computed from (a, b)
/// rather than transcribed as decimals.
double ishigami_total_variance(double a, double b);

}  // namespace coalsens
