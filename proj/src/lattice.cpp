#include "coalsens/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace coalsens {

long long mobius_boolean(SubsetMask b, SubsetMask a) {
  if (!subsets::is_subset_of(b, a))
    throw std::invalid_argument("mobius_boolean requires B to be a subset of A");
  return (subsets::cardinality(a) - subsets::cardinality(b)) % 2 == 0 ? 1 : -1;
}

SetFunctionTable::SetFunctionTable(int d, int matrix_size)
    : d_(d), matrix_size_(matrix_size) {
  channels_ = matrix_size == 0 ? 1 : SymMatrix::packed_size(matrix_size);
  data_.assign(subsets::table_size(d) * channels_, 0.0);
}

SetFunctionTable SetFunctionTable::scalar(int d) { return SetFunctionTable(d, 0); }

SetFunctionTable SetFunctionTable::matrix(int d, int matrix_size) {
  if (matrix_size <= 0)
    throw std::invalid_argument("matrix tables need a positive matrix size");
  return SetFunctionTable(d, matrix_size);
}

RingValue SetFunctionTable::get(SubsetMask a) const {
  if (is_scalar()) return RingValue(data_[a]);
  SymMatrix m(matrix_size_);
  auto& packed = m.packed();
  for (std::size_t c = 0; c < channels_; ++c) packed[c] = data_[a * channels_ + c];
  return RingValue(std::move(m));
}

void SetFunctionTable::set(SubsetMask a, const RingValue& value) {
  if (is_scalar()) {
    data_[a] = value.scalar();
    return;
  }
  const SymMatrix& m = value.matrix();
  if (m.size() != matrix_size_)
    throw std::invalid_argument("matrix entry shape does not match the table");
  for (std::size_t c = 0; c < channels_; ++c) data_[a * channels_ + c] = m.packed()[c];
}

double SetFunctionTable::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

// In-place per-coordinate subset-sum DP. sign = +1 gives subset sums (zeta),
// sign = -1 the inverse (Mobius). Channels are independent.
void subset_sum_dp(SetFunctionTable& t, double sign) {
  const int d = t.dimension();
  const std::size_t stride = t.channels();
  auto data = t.raw();
  for (int i = 0; i < d; ++i) {
    const SubsetMask bit = SubsetMask{1} << i;
    const std::size_t n = t.size();
    for (SubsetMask a = 0; a < n; ++a) {
      if (!(a & bit)) continue;
      double* dst = data.data() + a * stride;
      const double* src = data.data() + (a ^ bit) * stride;
      for (std::size_t c = 0; c < stride; ++c) dst[c] += sign * src[c];
    }
  }
}

}  // namespace

SetFunctionTable mobius_transform(const SetFunctionTable& table) {
  SetFunctionTable out = table;
  subset_sum_dp(out, -1.0);
  return out;
}

SetFunctionTable zeta_transform(const SetFunctionTable& table) {
  SetFunctionTable out = table;
  subset_sum_dp(out, +1.0);
  return out;
}

}  // namespace coalsens
