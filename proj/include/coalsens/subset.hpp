#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace coalsens {

/// A coalition A of the input index set {1,...,d}, encoded as a d-bit mask.
/// Input i (1-based) maps to bit i-1. This convention is fixed so that
/// serialized subset lists are stable across versions.
using SubsetMask = std::uint32_t;

/// Dense set-function tables hold 2^d entries; d above this is rejected.
inline constexpr int kMaxDimension = 24;

namespace subsets {

inline int cardinality(SubsetMask a) { return std::popcount(a); }

inline bool contains(SubsetMask a, int input_index_0based) {
  return (a >> input_index_0based) & 1u;
}

inline bool is_subset_of(SubsetMask b, SubsetMask a) { return (b & ~a) == 0; }

inline SubsetMask full_mask(int d) {
  if (d < 0 || d > kMaxDimension) {
    throw std::invalid_argument("dimension must satisfy 0 <= d <= " +
                                std::to_string(kMaxDimension));
  }
  return d == 0 ? 0u : ((SubsetMask{1} << d) - 1u);
}

inline std::size_t table_size(int d) {
  full_mask(d);  // validates the range of d
  return std::size_t{1} << d;
}

/// 0-based indices of the members of `a`, ascending.
inline std::vector<int> member_indices(SubsetMask a) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(cardinality(a)));
  while (a != 0) {
    const int i = std::countr_zero(a);
    out.push_back(i);
    a &= a - 1u;
  }
  return out;
}

/// Ascending 1-based index list, e.g. mask 0b101 -> "1,3". Empty set -> "".
inline std::string to_index_list(SubsetMask a) {
  std::string out;
  for (int i : member_indices(a)) {
    if (!out.empty()) out.push_back(',');
    out += std::to_string(i + 1);
  }
  return out;
}

}  // namespace subsets

}  // namespace coalsens
