#pragma once

#include <map>
#include <string>
#include <vector>

#include "etch/error.hpp"
#include "etch/index.hpp"

namespace etch {

/// A total function on a product of index domains, stored sparsely: absent
/// coordinates read as semiring zero. `shape` lists the universe ids of the
/// axes, strictly increasing; `entries` keys have one coordinate per axis.
template <typename R>
struct SparseVariable {
  std::vector<int> shape;
  std::map<Coord, R> entries;

  int rank() const { return static_cast<int>(shape.size()); }

  template <class S>
  R at(const Coord& c) const {
    auto it = entries.find(c);
    return it == entries.end() ? S::zero() : it->second;
  }

  template <class S>
  void accumulate(const Coord& c, const R& v) {
    auto it = entries.find(c);
    if (it == entries.end())
      entries.emplace(c, v);
    else
      it->second = S::add(it->second, v);
  }

  /// Drops entries equal to semiring zero (by the instance's eq).
  template <class S>
  SparseVariable normalized() const {
    SparseVariable out;
    out.shape = shape;
    for (const auto& [c, v] : entries)
      if (!S::eq(v, S::zero())) out.entries.emplace(c, v);
    return out;
  }
};

template <class S>
bool vars_equal(const SparseVariable<typename S::value_type>& a,
                const SparseVariable<typename S::value_type>& b) {
  if (a.shape != b.shape) return false;
  auto na = a.template normalized<S>();
  auto nb = b.template normalized<S>();
  if (na.entries.size() != nb.entries.size()) return false;
  auto ia = na.entries.begin();
  auto ib = nb.entries.begin();
  for (; ia != na.entries.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (!S::eq(ia->second, ib->second)) return false;
  }
  return true;
}

template <class S>
std::string var_to_text(const SparseVariable<typename S::value_type>& v) {
  std::string out = "{";
  bool first = true;
  for (const auto& [c, x] : v.entries) {
    if (!first) out += ", ";
    first = false;
    out += "(";
    for (size_t i = 0; i < c.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(c[i]);
    }
    out += ")=";
    out += S::to_text(x);
  }
  return out + "}";
}

}  // namespace etch
