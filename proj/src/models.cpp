#include "coalsens/models.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace coalsens {

Model::Model(std::string name, int input_dim, int output_dim, EvalFn eval,
             std::vector<double> params)
    : name_(std::move(name)),
      d_(input_dim),
      k_(output_dim),
      eval_(std::move(eval)),
      params_(std::move(params)) {
  if (d_ < 1 || k_ < 1) throw std::invalid_argument("model dimensions must be positive");
}

std::vector<double> Model::evaluate(std::span<const double> x) const {
  std::vector<double> out(static_cast<std::size_t>(k_));
  evaluate_into(x, out);
  return out;
}

void Model::evaluate_into(std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) != d_)
    throw std::invalid_argument("input row has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(d_));
  if (static_cast<int>(out.size()) != k_)
    throw std::invalid_argument("output span has the wrong dimension");
  eval_(x, out);
}

Model Model::ishigami(double a, double b) {
  return Model("ishigami", 3, 1,
               [a, b](std::span<const double> x, std::span<double> y) {
                 const double s1 = std::sin(x[0]);
                 const double s2 = std::sin(x[1]);
                 y[0] = s1 + a * s2 * s2 + b * x[2] * x[2] * x[2] * x[2] * s1;
               },
               {a, b});
}

Model Model::linear(std::vector<double> beta) {
  if (beta.empty()) throw std::invalid_argument("linear model needs coefficients");
  const int d = static_cast<int>(beta.size());
  auto coeffs = beta;
  return Model("linear", d, 1,
               [coeffs](std::span<const double> x, std::span<double> y) {
                 double acc = 0.0;
                 for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * x[i];
                 y[0] = acc;
               },
               std::move(beta));
}

Model Model::sum_diff() {
  return Model("sum_diff", 2, 2, [](std::span<const double> x, std::span<double> y) {
    y[0] = x[0] + x[1];
    y[1] = x[0] - x[1];
  });
}

Model Model::constant(int input_dim, double value) {
  return Model("constant", input_dim, 1,
               [value](std::span<const double>, std::span<double> y) { y[0] = value; },
               {value});
}

const std::vector<std::string>& Model::registry_names() {
  static const std::vector<std::string> names = {"ishigami", "linear", "sum_diff",
                                                 "constant"};
  return names;
}

double ishigami_total_variance(double a, double b) {
  const double pi4 = std::pow(M_PI, 4);
  const double pi8 = pi4 * pi4;
  return a * a / 8.0 + b * pi4 / 5.0 + b * b * pi8 / 18.0 + 0.5;
}

namespace {

bool is_uniform_minus_pi_pi(const Marginal& m) {
  if (m.family() != Marginal::Family::Uniform) return false;
  // mean and variance pin down (lo, hi) within a family
  return std::abs(m.mean()) < 1e-12 &&
         std::abs(m.variance() - M_PI * M_PI / 3.0) < 1e-12;
}

// Partial variances of E[G | X_A] for the Ishigami function with
// independent uniform(-pi, pi)^3 inputs. Only the {1}, {2} and {1,3}
// conditional means are non-additive pieces:
//   E[G | X_1]      = sin(x1) (1 + b pi^4 / 5) + a/2
//   E[G | X_2]      = a sin^2(x2)
//   E[G | X_1, X_3] = sin(x1) (1 + b x3^4) + a/2
double ishigami_phi(double a, double b, SubsetMask mask) {
  const double pi4 = std::pow(M_PI, 4);
  const double pi8 = pi4 * pi4;
  const bool has1 = subsets::contains(mask, 0);
  const bool has2 = subsets::contains(mask, 1);
  const bool has3 = subsets::contains(mask, 2);

  const double v2 = has2 ? a * a / 8.0 : 0.0;
  double v13 = 0.0;
  if (has1 && has3) {
    // Var(sin(X1)(1 + b X3^4)) = E[sin^2] E[(1 + b X3^4)^2]
    v13 = 0.5 * (1.0 + 2.0 * b * pi4 / 5.0 + b * b * pi8 / 9.0);
  } else if (has1) {
    const double scale = 1.0 + b * pi4 / 5.0;
    v13 = 0.5 * scale * scale;
  }
  return v13 + v2;
}

}  // namespace

std::optional<double> oracle_variance_phi(const Model& model, const InputModel& inputs,
                                          SubsetMask a) {
  if (model.input_dimension() != inputs.dimension()) return std::nullopt;
  const int d = inputs.dimension();
  const SubsetMask full = subsets::full_mask(d);
  if (!subsets::is_subset_of(a, full))
    throw std::invalid_argument("subset mask exceeds the model dimension");

  if (model.name() == "ishigami" &&
      inputs.type() == InputModel::Type::IndependentMarginals) {
    bool standard = d == 3;
    for (int i = 0; standard && i < d; ++i)
      standard = is_uniform_minus_pi_pi(inputs.marginals()[i]);
    if (!standard) return std::nullopt;
    return ishigami_phi(model.params()[0], model.params()[1], a);
  }

  if (model.name() == "linear") {
    const Eigen::Map<const Eigen::VectorXd> beta(model.params().data(), d);

    if (inputs.type() == InputModel::Type::IndependentMarginals) {
      // Additive model with independent inputs: phi_A = sum_{i in A} b_i^2 V_i.
      double acc = 0.0;
      for (int i : subsets::member_indices(a))
        acc += beta[i] * beta[i] * inputs.marginals()[i].variance();
      return acc;
    }

    if (inputs.type() == InputModel::Type::MultivariateGaussian) {
      // Var[E[G | X_A]] = w^T S_AA^{-1} w with w = S_{A.} beta: the variance
      // of the L2 projection of beta . X onto the span of X_A.
      if (a == 0) return 0.0;
      const Eigen::MatrixXd& cov = inputs.covariance();
      if (a == full) return beta.dot(cov * beta);
      const auto idx = subsets::member_indices(a);
      const int na = static_cast<int>(idx.size());
      Eigen::MatrixXd s_aa(na, na);
      Eigen::VectorXd w(na);
      for (int i = 0; i < na; ++i) {
        w[i] = cov.row(idx[i]).dot(beta);
        for (int j = 0; j < na; ++j) s_aa(i, j) = cov(idx[i], idx[j]);
      }
      return w.dot(s_aa.llt().solve(w));
    }
  }

  return std::nullopt;
}

}  // namespace coalsens
