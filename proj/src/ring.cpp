#include "coalsens/ring.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace coalsens {

SymMatrix::SymMatrix(int size, double fill) : size_(size) {
  if (size <= 0) throw std::invalid_argument("SymMatrix size must be positive");
  upper_.assign(packed_size(size), fill);
}

std::size_t SymMatrix::packed_index(int i, int j, int size) {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= size) throw std::out_of_range("SymMatrix index out of range");
  return static_cast<std::size_t>(i) * (2 * size - i - 1) / 2 + j;
}

double SymMatrix::operator()(int i, int j) const {
  return upper_[packed_index(i, j, size_)];
}

void SymMatrix::set(int i, int j, double value) {
  upper_[packed_index(i, j, size_)] = value;
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : upper_) m = std::max(m, std::abs(v));
  return m;
}

double RingValue::scalar() const {
  if (!is_scalar()) throw std::invalid_argument("RingValue is not scalar");
  return std::get<double>(value_);
}

const SymMatrix& RingValue::matrix() const {
  if (is_scalar()) throw std::invalid_argument("RingValue is not a matrix");
  return std::get<SymMatrix>(value_);
}

RingValue RingValue::zero_like() const {
  if (is_scalar()) return RingValue(0.0);
  return RingValue(SymMatrix(matrix().size(), 0.0));
}

RingValue RingValue::one_like() const {
  if (is_scalar()) return RingValue(1.0);
  return RingValue(SymMatrix(matrix().size(), 1.0));
}

bool RingValue::same_shape(const RingValue& other) const {
  if (kind() != other.kind()) return false;
  if (is_scalar()) return true;
  return matrix().same_shape(other.matrix());
}

double RingValue::max_abs() const {
  return is_scalar() ? std::abs(scalar()) : matrix().max_abs();
}

namespace {

void require_same_shape(const RingValue& a, const RingValue& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("ring operands have mismatched variant or shape");
  }
}

template <typename Op>
RingValue elementwise(const RingValue& a, const RingValue& b, Op op) {
  require_same_shape(a, b);
  if (a.is_scalar()) return RingValue(op(a.scalar(), b.scalar()));
  SymMatrix out = a.matrix();
  const auto& rhs = b.matrix().packed();
  auto& data = out.packed();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = op(data[i], rhs[i]);
  return RingValue(std::move(out));
}

}  // namespace

RingValue ring_add(const RingValue& a, const RingValue& b) {
  return elementwise(a, b, [](double x, double y) { return x + y; });
}

RingValue ring_mul(const RingValue& a, const RingValue& b) {
  return elementwise(a, b, [](double x, double y) { return x * y; });
}

RingValue ring_scale(const RingValue& a, double factor) {
  if (a.is_scalar()) return RingValue(a.scalar() * factor);
  SymMatrix out = a.matrix();
  for (double& v : out.packed()) v *= factor;
  return RingValue(std::move(out));
}

std::string DkCheck::describe() const {
  switch (status) {
    case Status::Accepted:
      return diag_sign > 0 ? "accepted (positive semidefinite)"
                           : "accepted (negative semidefinite)";
    case Status::ZeroDiagonal:
      return "rejected: zero diagonal entry";
    case Status::MixedDiagonalSigns:
      return "rejected: mixed diagonal signs";
    case Status::Indefinite:
      return "rejected: indefinite";
  }
  return "unknown";
}

DkCheck check_dk_membership(const SymMatrix& m, double tol) {
  DkCheck out;
  const int k = m.size();

  int sign = 0;
  for (int i = 0; i < k; ++i) {
    const double d = m(i, i);
    if (std::abs(d) <= tol) {
      out.status = DkCheck::Status::ZeroDiagonal;
      return out;
    }
    const int s = d > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) {
      out.status = DkCheck::Status::MixedDiagonalSigns;
      return out;
    }
  }

  Eigen::MatrixXd dense(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) dense(i, j) = m(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  out.min_eigenvalue = lo;
  out.max_eigenvalue = hi;

  const double scale = std::max(std::abs(lo), std::abs(hi));
  const bool psd = lo >= -tol * scale;
  const bool nsd = hi <= tol * scale;
  if (!psd && !nsd) {
    out.status = DkCheck::Status::Indefinite;
    return out;
  }
  out.status = DkCheck::Status::Accepted;
  out.diag_sign = sign;
  return out;
}

}  // namespace coalsens
