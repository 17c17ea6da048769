#include "coalsens/input_models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace coalsens {

Marginal Marginal::uniform(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("uniform requires lo < hi");
  return Marginal(Family::Uniform, lo, hi, 0.0);
}

Marginal Marginal::normal(double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("normal requires sd > 0");
  return Marginal(Family::Normal, mean, sd, 0.0);
}

Marginal Marginal::triangular(double lo, double mode, double hi) {
  if (!(lo < hi) || mode < lo || mode > hi)
    throw std::invalid_argument("triangular requires lo <= mode <= hi and lo < hi");
  return Marginal(Family::Triangular, lo, mode, hi);
}

double Marginal::cdf(double x) const {
  switch (family_) {
    case Family::Uniform: {
      if (x <= p1_) return 0.0;
      if (x >= p2_) return 1.0;
      return (x - p1_) / (p2_ - p1_);
    }
    case Family::Normal:
      return rng::normal_cdf((x - p1_) / p2_);
    case Family::Triangular: {
      const double a = p1_, c = p2_, b = p3_;
      if (x <= a) return 0.0;
      if (x >= b) return 1.0;
      if (x < c) return (x - a) * (x - a) / ((b - a) * (c - a));
      if (x > c) return 1.0 - (b - x) * (b - x) / ((b - a) * (b - c));
      return (c - a) / (b - a);
    }
  }
  return 0.0;
}

double Marginal::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("marginal quantile requires u in (0, 1)");
  switch (family_) {
    case Family::Uniform:
      return p1_ + u * (p2_ - p1_);
    case Family::Normal:
      return p1_ + p2_ * rng::normal_quantile(u);
    case Family::Triangular: {
      const double a = p1_, c = p2_, b = p3_;
      const double split = (c - a) / (b - a);
      if (u < split) return a + std::sqrt(u * (b - a) * (c - a));
      return b - std::sqrt((1.0 - u) * (b - a) * (b - c));
    }
  }
  return 0.0;
}

double Marginal::sample(rng::Generator& gen) const { return quantile(gen.uniform01()); }

double Marginal::mean() const {
  switch (family_) {
    case Family::Uniform: return 0.5 * (p1_ + p2_);
    case Family::Normal: return p1_;
    case Family::Triangular: return (p1_ + p2_ + p3_) / 3.0;
  }
  return 0.0;
}

double Marginal::variance() const {
  switch (family_) {
    case Family::Uniform: {
      const double w = p2_ - p1_;
      return w * w / 12.0;
    }
    case Family::Normal:
      return p2_ * p2_;
    case Family::Triangular: {
      const double a = p1_, c = p2_, b = p3_;
      return (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0;
    }
  }
  return 0.0;
}

bool Marginal::in_support(double x) const {
  switch (family_) {
    case Family::Uniform: return x >= p1_ && x <= p2_;
    case Family::Normal: return std::isfinite(x);
    case Family::Triangular: return x >= p1_ && x <= p3_;
  }
  return false;
}

std::string Marginal::describe() const {
  std::ostringstream os;
  switch (family_) {
    case Family::Uniform: os << "uniform(" << p1_ << ", " << p2_ << ")"; break;
    case Family::Normal: os << "normal(" << p1_ << ", " << p2_ << ")"; break;
    case Family::Triangular:
      os << "triangular(" << p1_ << ", " << p2_ << ", " << p3_ << ")";
      break;
  }
  return os.str();
}

namespace {

// Push a latent standard normal through a marginal quantile. The CDF value
// is kept strictly inside (0, 1) so extreme latent draws cannot underflow
// into the quantile's domain error.
double push_through_marginal(const Marginal& m, double z) {
  double u = rng::normal_cdf(z);
  u = std::min(std::max(u, 1e-300), 0x1.fffffffffffffp-1);
  return m.quantile(u);
}

Eigen::MatrixXd cholesky_or_throw(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + " must be square");
  if (!m.isApprox(m.transpose(), 1e-12))
    throw std::invalid_argument(std::string(what) + " must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(std::string(what) + " must be positive-definite");
  return llt.matrixL();
}

}  // namespace

InputModel InputModel::independent(std::vector<Marginal> marginals) {
  if (marginals.empty()) throw std::invalid_argument("need at least one marginal");
  InputModel m;
  m.type_ = Type::IndependentMarginals;
  m.d_ = static_cast<int>(marginals.size());
  m.marginals_ = std::move(marginals);
  return m;
}

InputModel InputModel::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  if (mean.size() != cov.rows())
    throw std::invalid_argument("mean and covariance dimensions disagree");
  InputModel m;
  m.type_ = Type::MultivariateGaussian;
  m.d_ = static_cast<int>(mean.size());
  m.chol_ = cholesky_or_throw(cov, "covariance");
  m.mean_ = std::move(mean);
  m.cov_ = std::move(cov);
  return m;
}

InputModel InputModel::gaussian_copula(Eigen::MatrixXd correlation,
                                       std::vector<Marginal> marginals) {
  if (static_cast<int>(marginals.size()) != correlation.rows())
    throw std::invalid_argument("marginal count and correlation dimension disagree");
  for (int i = 0; i < correlation.rows(); ++i)
    if (std::abs(correlation(i, i) - 1.0) > 1e-12)
      throw std::invalid_argument("correlation matrix must have unit diagonal");
  InputModel m;
  m.type_ = Type::GaussianCopula;
  m.d_ = static_cast<int>(marginals.size());
  m.chol_ = cholesky_or_throw(correlation, "correlation");
  m.cov_ = std::move(correlation);
  m.marginals_ = std::move(marginals);
  return m;
}

const std::vector<Marginal>& InputModel::marginals() const {
  if (type_ == Type::MultivariateGaussian)
    throw std::logic_error("a multivariate Gaussian model has no marginal list");
  return marginals_;
}

const Eigen::VectorXd& InputModel::mean() const {
  if (type_ != Type::MultivariateGaussian)
    throw std::logic_error("mean vector is only stored for Gaussian models");
  return mean_;
}

const Eigen::MatrixXd& InputModel::covariance() const {
  if (type_ == Type::IndependentMarginals)
    throw std::logic_error("independent models have no covariance matrix");
  return cov_;
}

std::string InputModel::describe() const {
  std::ostringstream os;
  switch (type_) {
    case Type::IndependentMarginals: os << "independent("; break;
    case Type::MultivariateGaussian: return "gaussian(d=" + std::to_string(d_) + ")";
    case Type::GaussianCopula: os << "gaussian_copula("; break;
  }
  for (std::size_t i = 0; i < marginals_.size(); ++i) {
    if (i) os << ", ";
    os << marginals_[i].describe();
  }
  os << ")";
  return os.str();
}

SampleBlock InputModel::sample_joint(int n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  SampleBlock block;
  block.n = n;
  block.d = d_;
  block.seed = seed;
  block.data.resize(static_cast<std::size_t>(n) * d_);

  rng::Generator gen(seed);
  Eigen::VectorXd z(d_);
  for (int r = 0; r < n; ++r) {
    double* row = block.data.data() + static_cast<std::size_t>(r) * d_;
    switch (type_) {
      case Type::IndependentMarginals:
        for (int i = 0; i < d_; ++i) row[i] = marginals_[i].sample(gen);
        break;
      case Type::MultivariateGaussian: {
        for (int i = 0; i < d_; ++i) z[i] = gen.normal();
        Eigen::Map<Eigen::VectorXd>(row, d_) = mean_ + chol_ * z;
        break;
      }
      case Type::GaussianCopula: {
        for (int i = 0; i < d_; ++i) z[i] = gen.normal();
        const Eigen::VectorXd latent = chol_ * z;
        for (int i = 0; i < d_; ++i)
          row[i] = push_through_marginal(marginals_[i], latent[i]);
        break;
      }
    }
  }
  return block;
}

void InputModel::require_in_support(int coord, double x) const {
  if (type_ == Type::MultivariateGaussian) {
    if (!std::isfinite(x)) throw std::invalid_argument("conditioning value is not finite");
    return;
  }
  if (!marginals_[coord].in_support(x))
    throw std::invalid_argument("conditioning value outside the support of input " +
                                std::to_string(coord + 1));
  if (type_ == Type::GaussianCopula) {
    const double u = marginals_[coord].cdf(x);
    if (!(u > 0.0 && u < 1.0))
      throw std::invalid_argument(
          "conditioning value lies on the support boundary of input " +
          std::to_string(coord + 1));
  }
}

double InputModel::latent_from_value(int coord, double x) const {
  return rng::normal_quantile(marginals_[coord].cdf(x));
}

SampleBlock InputModel::sample_conditional(SubsetMask a, std::span<const double> x_a,
                                           int n, std::uint64_t seed) const {
  const SubsetMask full = subsets::full_mask(d_);
  if (a == 0 || a == full)
    throw std::invalid_argument(
        "sample_conditional requires a nonempty proper subset; the empty and "
        "full coalitions are handled analytically by callers");
  if (!subsets::is_subset_of(a, full))
    throw std::invalid_argument("subset mask exceeds the model dimension");
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");

  const std::vector<int> pinned = subsets::member_indices(a);
  const std::vector<int> free = subsets::member_indices(full & ~a);
  if (x_a.size() != pinned.size())
    throw std::invalid_argument("x_A length does not match |A|");
  for (std::size_t i = 0; i < pinned.size(); ++i)
    require_in_support(pinned[i], x_a[i]);

  SampleBlock block;
  block.n = n;
  block.d = d_;
  block.seed = seed;
  block.data.resize(static_cast<std::size_t>(n) * d_);
  rng::Generator gen(seed);

  const int nf = static_cast<int>(free.size());
  const int np = static_cast<int>(pinned.size());

  if (type_ == Type::IndependentMarginals) {
    for (int r = 0; r < n; ++r) {
      double* row = block.data.data() + static_cast<std::size_t>(r) * d_;
      for (std::size_t i = 0; i < pinned.size(); ++i) row[pinned[i]] = x_a[i];
      for (int i : free) row[i] = marginals_[i].sample(gen);
    }
    return block;
  }

  // Latent-Gaussian conditional, shared by the Gaussian and copula cases.
  // Given Z ~ N(mu, S): Z_free | Z_pin = v is Gaussian with
  //   mean mu_f + S_fp S_pp^{-1} (v - mu_p),
  //   cov  S_ff - S_fp S_pp^{-1} S_pf   (Schur complement).
  const bool copula = type_ == Type::GaussianCopula;
  Eigen::VectorXd pin_values(np);
  for (int i = 0; i < np; ++i)
    pin_values[i] = copula ? latent_from_value(pinned[i], x_a[i]) : x_a[i];

  Eigen::MatrixXd s_pp(np, np), s_fp(nf, np), s_ff(nf, nf);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < np; ++j) s_pp(i, j) = cov_(pinned[i], pinned[j]);
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < np; ++j) s_fp(i, j) = cov_(free[i], pinned[j]);
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nf; ++j) s_ff(i, j) = cov_(free[i], free[j]);

  const Eigen::VectorXd mu_p =
      copula ? Eigen::VectorXd::Zero(np)
             : Eigen::VectorXd(mean_(pinned).eval());
  const Eigen::VectorXd mu_f =
      copula ? Eigen::VectorXd::Zero(nf)
             : Eigen::VectorXd(mean_(free).eval());

  Eigen::LLT<Eigen::MatrixXd> llt_pp(s_pp);
  if (llt_pp.info() != Eigen::Success)
    throw std::runtime_error("pinned-block covariance is not positive-definite");
  const Eigen::MatrixXd gain = llt_pp.solve(s_fp.transpose()).transpose();  // S_fp S_pp^{-1}
  const Eigen::VectorXd cond_mean = mu_f + gain * (pin_values - mu_p);
  Eigen::MatrixXd cond_cov = s_ff - gain * s_fp.transpose();
  cond_cov = 0.5 * (cond_cov + cond_cov.transpose());

  // The Schur complement can brush zero when the pinned coalition nearly
  // determines a free coordinate; LDLT tolerates the semidefinite case.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cond_cov);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("conditional covariance factorization failed");
  Eigen::MatrixXd l = ldlt.matrixL();
  Eigen::VectorXd sqrt_d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor =
      ldlt.transpositionsP().transpose() * Eigen::MatrixXd(l * sqrt_d.asDiagonal());

  Eigen::VectorXd z(nf);
  for (int r = 0; r < n; ++r) {
    double* row = block.data.data() + static_cast<std::size_t>(r) * d_;
    for (int i = 0; i < np; ++i) row[pinned[i]] = x_a[i];
    for (int i = 0; i < nf; ++i) z[i] = gen.normal();
    const Eigen::VectorXd zf = cond_mean + factor * z;
    for (int i = 0; i < nf; ++i) {
      row[free[i]] = copula ? push_through_marginal(marginals_[free[i]], zf[i]) : zf[i];
    }
  }
  return block;
}

}  // namespace coalsens
