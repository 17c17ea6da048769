#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "coalsens/ring.hpp"
#include "coalsens/subset.hpp"

namespace coalsens {

/// Finite partially ordered set over nodes 0..n-1 with a dense leq table.
/// Construction verifies reflexivity, antisymmetry and transitivity for
/// posets of up to kAxiomCheckLimit nodes (covers every poset the tests and
/// factories build); larger relations are taken on trust.
class FinitePoset {
 public:
  static constexpr int kAxiomCheckLimit = 64;

  FinitePoset(int node_count, std::function<bool(int, int)> leq);

  /// Total order 0 < 1 < ... < n-1.
  static FinitePoset chain(int node_count);
  /// (P({1..d}), subset-inclusion); node ids are the subset masks.
  static FinitePoset boolean_lattice(int d);

  int node_count() const { return n_; }
  bool leq(int x, int y) const { return leq_[static_cast<std::size_t>(x) * n_ + y] != 0; }

  /// Nodes z with x <= z <= y, sorted by a linear extension of the segment
  /// order (here: by in-segment down-set size).
  std::vector<int> segment(int x, int y) const;

  bool operator==(const FinitePoset& other) const {
    return n_ == other.n_ && leq_ == other.leq_;
  }

 private:
  int n_;
  std::vector<char> leq_;
};

/// Mobius function mu(x, y) of a finite poset, evaluated by the recursion
/// mu(x,x) = 1, mu(x,y) = -sum_{x <= z < y} mu(x,z). The whole segment row
/// is filled by dynamic programming, so a call costs O(|segment|^2).
long long mobius_recursive(const FinitePoset& poset, int x, int y);

/// Element of the incidence algebra: values on ordered pairs x <= y.
class IncidenceFunction {
 public:
  IncidenceFunction(std::shared_ptr<const FinitePoset> poset, RingValue init);

  /// delta(x,y) = 1 iff x = y: the convolution identity.
  static IncidenceFunction delta(std::shared_ptr<const FinitePoset> poset);
  /// zeta_standard(x,y) = 1 iff x <= y. Note this is the standard zeta whose
  /// convolution inverse is the Mobius function; it differs from the
  /// delta-like "zeta" that some texts use for the identity element.
  static IncidenceFunction zeta_standard(std::shared_ptr<const FinitePoset> poset);
  /// The Mobius function as an incidence-algebra element.
  static IncidenceFunction mobius(std::shared_ptr<const FinitePoset> poset);

  const FinitePoset& poset() const { return *poset_; }
  std::shared_ptr<const FinitePoset> poset_ptr() const { return poset_; }

  const RingValue& at(int x, int y) const;
  void set(int x, int y, RingValue value);

 private:
  std::shared_ptr<const FinitePoset> poset_;
  std::vector<RingValue> values_;  // dense n*n; only x <= y is meaningful
};

/// (f*g)(x,z) = sum_{x <= y <= z} f(x,y) g(y,z). Used to verify that the
/// Mobius function inverts zeta_standard; not on any hot path.
IncidenceFunction convolve(const IncidenceFunction& f, const IncidenceFunction& g);

}  // namespace coalsens
