#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "etch/error.hpp"
#include "etch/index.hpp"
#include "etch/semiring.hpp"
#include "etch/variable.hpp"

namespace etch {

// Reference semantics on variables. Everything here is deliberately naive:
// these functions define what the stream machinery must compute, so they get
// no shortcuts beyond sparse storage.

template <class S>
SparseVariable<typename S::value_type> var_mul(
    const SparseVariable<typename S::value_type>& a,
    const SparseVariable<typename S::value_type>& b) {
  if (a.shape != b.shape) fail(ErrorKind::ShapeMismatch, "var_mul: operands differ in shape");
  SparseVariable<typename S::value_type> out;
  out.shape = a.shape;
  for (const auto& [c, v] : a.entries) {
    auto it = b.entries.find(c);
    if (it != b.entries.end()) out.entries.emplace(c, S::mul(v, it->second));
  }
  return out.template normalized<S>();
}

template <class S>
SparseVariable<typename S::value_type> var_add(
    const SparseVariable<typename S::value_type>& a,
    const SparseVariable<typename S::value_type>& b) {
  if (a.shape != b.shape) fail(ErrorKind::ShapeMismatch, "var_add: operands differ in shape");
  SparseVariable<typename S::value_type> out = a;
  for (const auto& [c, v] : b.entries) out.template accumulate<S>(c, v);
  return out.template normalized<S>();
}

/// Marginalizes axis `i` away: out(x) = sum over c in I_i of a(x with i=c).
template <class S>
SparseVariable<typename S::value_type> var_sum(
    int i, const SparseVariable<typename S::value_type>& a) {
  auto pos = std::find(a.shape.begin(), a.shape.end(), i);
  if (pos == a.shape.end()) fail(ErrorKind::MissingIndex, "var_sum: axis not present");
  size_t axis = static_cast<size_t>(pos - a.shape.begin());
  SparseVariable<typename S::value_type> out;
  out.shape = a.shape;
  out.shape.erase(out.shape.begin() + axis);
  for (const auto& [c, v] : a.entries) {
    Coord key = c;
    key.erase(key.begin() + axis);
    out.template accumulate<S>(key, v);
  }
  return out.template normalized<S>();
}

/// Precomposes with the projection that forgets axis `i`: the result is
/// constant along I_i. Explicitly materializes all |I_i| copies.
template <class S>
SparseVariable<typename S::value_type> var_rep(
    int i, const SparseVariable<typename S::value_type>& a, const IndexUniverse& universe) {
  if (std::find(a.shape.begin(), a.shape.end(), i) != a.shape.end())
    fail(ErrorKind::IndexPresent, "var_rep: axis already present");
  size_t axis = 0;
  while (axis < a.shape.size() && a.shape[axis] < i) ++axis;
  SparseVariable<typename S::value_type> out;
  out.shape = a.shape;
  out.shape.insert(out.shape.begin() + axis, i);
  Index d = universe.size_of(i);
  for (const auto& [c, v] : a.entries)
    for (Index x = 0; x < d; ++x) {
      Coord key = c;
      key.insert(key.begin() + axis, x);
      out.entries.emplace(std::move(key), v);
    }
  return out;
}

/// One contraction problem: multiply the factors pointwise over the union of
/// their index sets, then sum out the `contracted` axes.
template <typename R>
struct ContractionInstance {
  std::vector<SparseVariable<R>> factors;
  std::vector<int> contracted;
};

/// Brute-force meaning of a contraction: enumerates the full product of the
/// mentioned domains. Guarded, since the walk is exponential in rank.
template <class S>
SparseVariable<typename S::value_type> contract_reference(
    const ContractionInstance<typename S::value_type>& inst, const IndexUniverse& universe) {
  using R = typename S::value_type;
  std::vector<int> mentioned;
  for (const auto& f : inst.factors)
    for (int id : f.shape)
      if (std::find(mentioned.begin(), mentioned.end(), id) == mentioned.end())
        mentioned.push_back(id);
  std::sort(mentioned.begin(), mentioned.end());
  for (int id : inst.contracted)
    if (std::find(mentioned.begin(), mentioned.end(), id) == mentioned.end())
      fail(ErrorKind::MissingIndex, "contract_reference: contracted axis unused");

  std::uint64_t space = 1;
  for (int id : mentioned) {
    space *= static_cast<std::uint64_t>(universe.size_of(id));
    if (space > (1u << 16))
      fail(ErrorKind::Budget, "contract_reference: domain product exceeds 2^16");
  }

  std::vector<int> free_ids;
  for (int id : mentioned)
    if (std::find(inst.contracted.begin(), inst.contracted.end(), id) == inst.contracted.end())
      free_ids.push_back(id);

  // Positions of each factor's axes, and of the free axes, inside `mentioned`.
  std::vector<std::vector<size_t>> factor_pos;
  for (const auto& f : inst.factors) {
    std::vector<size_t> pos;
    for (int id : f.shape)
      pos.push_back(static_cast<size_t>(
          std::find(mentioned.begin(), mentioned.end(), id) - mentioned.begin()));
    factor_pos.push_back(std::move(pos));
  }
  std::vector<size_t> free_pos;
  for (int id : free_ids)
    free_pos.push_back(static_cast<size_t>(
        std::find(mentioned.begin(), mentioned.end(), id) - mentioned.begin()));

  SparseVariable<R> out;
  out.shape = free_ids;
  Coord point(mentioned.size(), 0);
  const std::uint64_t steps = mentioned.empty() ? 1 : space;
  Coord fkey(free_ids.size());
  for (std::uint64_t n = 0; n < steps; ++n) {
    R prod = S::one();
    bool zero = false;
    Coord sub;
    for (size_t k = 0; k < inst.factors.size() && !zero; ++k) {
      sub.clear();
      for (size_t p : factor_pos[k]) sub.push_back(point[p]);
      auto it = inst.factors[k].entries.find(sub);
      if (it == inst.factors[k].entries.end()) {
        zero = true;
      } else {
        prod = S::mul(prod, it->second);
      }
    }
    if (!zero) {
      for (size_t a = 0; a < free_pos.size(); ++a) fkey[a] = point[free_pos[a]];
      out.template accumulate<S>(fkey, prod);
    }
    // mixed-radix increment over `mentioned`
    for (size_t p = mentioned.size(); p-- > 0;) {
      if (++point[p] < universe.size_of(mentioned[p])) break;
      point[p] = 0;
    }
  }
  return out.template normalized<S>();
}

}  // namespace etch
