#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace coalsens {

/// Symmetric k x k real matrix stored as its packed upper triangle, so
/// symmetry is exact by construction. Row-major packing: entry (i,j) with
/// i <= j lives at i*(2k-i-1)/2 + j.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int size, double fill = 0.0);

  static std::size_t packed_size(int size) {
    return static_cast<std::size_t>(size) * (size + 1) / 2;
  }
  static std::size_t packed_index(int i, int j, int size);

  int size() const { return size_; }

  double operator()(int i, int j) const;
  void set(int i, int j, double value);

  std::vector<double>& packed() { return upper_; }
  const std::vector<double>& packed() const { return upper_; }

  bool same_shape(const SymMatrix& other) const { return size_ == other.size_; }
  double max_abs() const;

 private:
  int size_ = 0;
  std::vector<double> upper_;
};

/// An element of the commutative ring with identity the decompositions are
/// valued in: either a real scalar, or a symmetric matrix under elementwise
/// (Hadamard) addition and multiplication.
class RingValue {
 public:
  enum class Kind { Scalar, HadamardMatrix };

  RingValue() : value_(0.0) {}
  RingValue(double scalar) : value_(scalar) {}
  RingValue(SymMatrix matrix) : value_(std::move(matrix)) {}

  Kind kind() const {
    return std::holds_alternative<double>(value_) ? Kind::Scalar
                                                  : Kind::HadamardMatrix;
  }
  bool is_scalar() const { return kind() == Kind::Scalar; }

  double scalar() const;
  const SymMatrix& matrix() const;

  /// Additive identity of the same shape as this value.
  RingValue zero_like() const;
  /// Multiplicative identity of the same shape (all-ones for matrices).
  RingValue one_like() const;

  bool same_shape(const RingValue& other) const;
  double max_abs() const;

 private:
  std::variant<double, SymMatrix> value_;
};

/// Elementwise sum. Throws std::invalid_argument on variant or shape mismatch.
RingValue ring_add(const RingValue& a, const RingValue& b);

/// Elementwise (Hadamard) product; the plain product for scalars.
RingValue ring_mul(const RingValue& a, const RingValue& b);

/// Scaling by a real number (used by the lattice transforms and tests).
RingValue ring_scale(const RingValue& a, double factor);

/// Result of testing a symmetric matrix for membership in the Hadamard ring
/// of semidefinite matrices with same-sign nonzero diagonal entries.
struct DkCheck {
  enum class Status { Accepted, ZeroDiagonal, MixedDiagonalSigns, Indefinite };

  Status status = Status::Accepted;
  int diag_sign = 0;     // +1 or -1 when accepted
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;

  bool accepted() const { return status == Status::Accepted; }
  std::string describe() const;
};

/// Accepts iff all diagonal entries satisfy |m_ii| > tol, share one sign, and
/// the eigenvalues are one-sided up to tol * spectral norm. Monte Carlo
/// covariance estimates can be slightly indefinite, so callers treat this as
/// a diagnostic rather than a hard gate.
DkCheck check_dk_membership(const SymMatrix& m, double tol = 1e-8);

}  // namespace coalsens
