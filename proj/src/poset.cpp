#include "coalsens/poset.hpp"

#include <algorithm>
#include <stdexcept>

namespace coalsens {

FinitePoset::FinitePoset(int node_count, std::function<bool(int, int)> leq)
    : n_(node_count) {
  if (n_ <= 0) throw std::invalid_argument("poset must have at least one node");
  leq_.assign(static_cast<std::size_t>(n_) * n_, 0);
  for (int x = 0; x < n_; ++x)
    for (int y = 0; y < n_; ++y)
      leq_[static_cast<std::size_t>(x) * n_ + y] = leq(x, y) ? 1 : 0;

  if (n_ <= kAxiomCheckLimit) {
    for (int x = 0; x < n_; ++x) {
      if (!this->leq(x, x)) throw std::invalid_argument("relation is not reflexive");
    }
    for (int x = 0; x < n_; ++x)
      for (int y = 0; y < n_; ++y) {
        if (x != y && this->leq(x, y) && this->leq(y, x))
          throw std::invalid_argument("relation is not antisymmetric");
      }
    for (int x = 0; x < n_; ++x)
      for (int y = 0; y < n_; ++y) {
        if (!this->leq(x, y)) continue;
        for (int z = 0; z < n_; ++z)
          if (this->leq(y, z) && !this->leq(x, z))
            throw std::invalid_argument("relation is not transitive");
      }
  }
}

FinitePoset FinitePoset::chain(int node_count) {
  return FinitePoset(node_count, [](int x, int y) { return x <= y; });
}

FinitePoset FinitePoset::boolean_lattice(int d) {
  const auto n = subsets::table_size(d);
  return FinitePoset(static_cast<int>(n), [](int x, int y) {
    return subsets::is_subset_of(static_cast<SubsetMask>(x),
                                 static_cast<SubsetMask>(y));
  });
}

std::vector<int> FinitePoset::segment(int x, int y) const {
  std::vector<int> nodes;
  for (int z = 0; z < n_; ++z)
    if (leq(x, z) && leq(z, y)) nodes.push_back(z);

  // Down-set size within the segment is strictly monotone along the order,
  // so sorting by it yields a linear extension.
  std::vector<int> rank(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (int w : nodes)
      if (leq(w, nodes[i])) ++rank[i];

  std::vector<std::size_t> idx(nodes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });

  std::vector<int> out(nodes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = nodes[idx[i]];
  return out;
}

long long mobius_recursive(const FinitePoset& poset, int x, int y) {
  if (x < 0 || y < 0 || x >= poset.node_count() || y >= poset.node_count())
    throw std::out_of_range("poset node out of range");
  if (!poset.leq(x, y))
    throw std::invalid_argument("mobius_recursive requires x <= y");

  const auto seg = poset.segment(x, y);
  std::vector<long long> mu(seg.size(), 0);
  // seg is in linear-extension order with seg[0] == x, so each value only
  // depends on earlier entries.
  for (std::size_t i = 0; i < seg.size(); ++i) {
    if (seg[i] == x) {
      mu[i] = 1;
      continue;
    }
    long long acc = 0;
    for (std::size_t j = 0; j < i; ++j)
      if (poset.leq(seg[j], seg[i]) && seg[j] != seg[i]) acc += mu[j];
    mu[i] = -acc;
  }
  return mu.back();
}

IncidenceFunction::IncidenceFunction(std::shared_ptr<const FinitePoset> poset,
                                     RingValue init)
    : poset_(std::move(poset)) {
  const auto n = static_cast<std::size_t>(poset_->node_count());
  values_.assign(n * n, init.zero_like());
}

IncidenceFunction IncidenceFunction::delta(std::shared_ptr<const FinitePoset> poset) {
  IncidenceFunction f(poset, RingValue(0.0));
  for (int x = 0; x < poset->node_count(); ++x) f.set(x, x, RingValue(1.0));
  return f;
}

IncidenceFunction IncidenceFunction::zeta_standard(
    std::shared_ptr<const FinitePoset> poset) {
  IncidenceFunction f(poset, RingValue(0.0));
  for (int x = 0; x < poset->node_count(); ++x)
    for (int y = 0; y < poset->node_count(); ++y)
      if (poset->leq(x, y)) f.set(x, y, RingValue(1.0));
  return f;
}

IncidenceFunction IncidenceFunction::mobius(std::shared_ptr<const FinitePoset> poset) {
  IncidenceFunction f(poset, RingValue(0.0));
  for (int x = 0; x < poset->node_count(); ++x)
    for (int y = 0; y < poset->node_count(); ++y)
      if (poset->leq(x, y))
        f.set(x, y, RingValue(static_cast<double>(mobius_recursive(*poset, x, y))));
  return f;
}

const RingValue& IncidenceFunction::at(int x, int y) const {
  return values_[static_cast<std::size_t>(x) * poset_->node_count() + y];
}

void IncidenceFunction::set(int x, int y, RingValue value) {
  if (!poset_->leq(x, y))
    throw std::invalid_argument("incidence function is only defined on x <= y");
  values_[static_cast<std::size_t>(x) * poset_->node_count() + y] = std::move(value);
}

IncidenceFunction convolve(const IncidenceFunction& f, const IncidenceFunction& g) {
  if (!(f.poset_ptr() == g.poset_ptr() || f.poset() == g.poset()))
    throw std::invalid_argument("convolve requires both functions on one poset");

  const int n = f.poset().node_count();
  IncidenceFunction out(f.poset_ptr(), RingValue(0.0));
  for (int x = 0; x < n; ++x) {
    for (int z = 0; z < n; ++z) {
      if (!f.poset().leq(x, z)) continue;
      RingValue acc(0.0);
      bool first = true;
      for (int y = 0; y < n; ++y) {
        if (!(f.poset().leq(x, y) && f.poset().leq(y, z))) continue;
        const RingValue term = ring_mul(f.at(x, y), g.at(y, z));
        acc = first ? term : ring_add(acc, term);
        first = false;
      }
      out.set(x, z, acc);
    }
  }
  return out;
}

}  // namespace coalsens
