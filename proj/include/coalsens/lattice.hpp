#pragma once

#include <span>
#include <vector>

#include "coalsens/ring.hpp"
#include "coalsens/subset.hpp"

namespace coalsens {

/// Mobius function of the Boolean lattice (P(D), subset-of) in closed form:
/// mu(B, A) = (-1)^{|A| - |B|} for B a subset of A. Throws if B is not a
/// subset of A.
long long mobius_boolean(SubsetMask b, SubsetMask a);

/// Dense map from every subset of {1,...,d} to a ring value. All entries
/// share one ring domain: either scalars or k x k symmetric matrices stored
/// as packed upper triangles. Storage is a flat [mask][channel] array so the
/// lattice transforms can run channel-wise over contiguous memory.
class SetFunctionTable {
 public:
  SetFunctionTable() : SetFunctionTable(0, 0) {}

  static SetFunctionTable scalar(int d);
  static SetFunctionTable matrix(int d, int matrix_size);

  int dimension() const { return d_; }
  bool is_scalar() const { return matrix_size_ == 0; }
  int matrix_size() const { return matrix_size_; }
  /// Ring values per entry: 1 for scalars, k(k+1)/2 for matrices.
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return subsets::table_size(d_); }

  RingValue get(SubsetMask a) const;
  void set(SubsetMask a, const RingValue& value);

  double get_channel(SubsetMask a, std::size_t channel) const {
    return data_[a * channels_ + channel];
  }
  void set_channel(SubsetMask a, std::size_t channel, double value) {
    data_[a * channels_ + channel] = value;
  }

  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  double max_abs() const;
  bool same_domain(const SetFunctionTable& other) const {
    return d_ == other.d_ && matrix_size_ == other.matrix_size_;
  }

 private:
  SetFunctionTable(int d, int matrix_size);

  int d_;
  int matrix_size_;  // 0 = scalar ring
  std::size_t channels_;
  std::vector<double> data_;
};

/// Forward Mobius transform on the power set:
///   out_A = sum_{B subset of A} (-1)^{|A \ B|} in_B.
/// Runs the in-place per-coordinate subset-sum dynamic program, O(d 2^d)
/// ring operations instead of the O(3^d) double loop over subset pairs.
SetFunctionTable mobius_transform(const SetFunctionTable& table);

/// Inverse transform (subset sums): out_A = sum_{B subset of A} in_B.
SetFunctionTable zeta_transform(const SetFunctionTable& table);

}  // namespace coalsens
