#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace etch {

/// A semiring instance is a stateless policy type:
///   value_type, zero(), one(), add(), mul(), eq(), from_real(), to_text().
/// eq() is the instance's notion of equality; floating-point instances use a
/// relative tolerance, discrete ones are exact.

inline bool approx_eq(double a, double b) {
  if (a == b) return true;
  double diff = std::fabs(a - b);
  double scale = std::fmax(std::fabs(a), std::fabs(b));
  return diff <= std::fmax(1e-12, 1e-9 * scale);
}

inline std::string real_to_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Arithmetic {
  using value_type = double;
  static constexpr const char* name = "f64";
  static value_type zero() { return 0.0; }
  static value_type one() { return 1.0; }
  static value_type add(value_type a, value_type b) { return a + b; }
  static value_type mul(value_type a, value_type b) { return a * b; }
  static bool eq(value_type a, value_type b) { return approx_eq(a, b); }
  static value_type from_real(double v) { return v; }
  static std::string to_text(value_type v) { return real_to_text(v); }
};

struct Integer {
  using value_type = std::int64_t;
  static constexpr const char* name = "int";
  static value_type zero() { return 0; }
  static value_type one() { return 1; }
  static value_type add(value_type a, value_type b) { return a + b; }
  static value_type mul(value_type a, value_type b) { return a * b; }
  static bool eq(value_type a, value_type b) { return a == b; }
  static value_type from_real(double v) { return static_cast<value_type>(std::llround(v)); }
  static std::string to_text(value_type v) { return std::to_string(v); }
};

struct Boolean {
  using value_type = bool;
  static constexpr const char* name = "bool";
  static value_type zero() { return false; }
  static value_type one() { return true; }
  static value_type add(value_type a, value_type b) { return a || b; }
  static value_type mul(value_type a, value_type b) { return a && b; }
  static bool eq(value_type a, value_type b) { return a == b; }
  static value_type from_real(double v) { return v != 0.0; }
  static std::string to_text(value_type v) { return v ? "1" : "0"; }
};

/// Carrier for min-plus: T extended with a distinguished +infinity.
/// Infinity is absorbing under mul (inf + x = inf) and the identity of add (min).
template <typename T>
struct MinPlusValue {
  T v{};
  bool inf = true;

  static MinPlusValue finite(T x) { return {x, false}; }
  static MinPlusValue infinity() { return {T{}, true}; }
};

template <typename T>
struct MinPlus {
  using value_type = MinPlusValue<T>;
  static constexpr const char* name = "minplus";
  static value_type zero() { return value_type::infinity(); }
  static value_type one() { return value_type::finite(T{}); }
  static value_type add(value_type a, value_type b) {
    if (a.inf) return b;
    if (b.inf) return a;
    return value_type::finite(a.v < b.v ? a.v : b.v);
  }
  static value_type mul(value_type a, value_type b) {
    if (a.inf || b.inf) return value_type::infinity();
    return value_type::finite(a.v + b.v);
  }
  static bool eq(value_type a, value_type b) {
    if (a.inf || b.inf) return a.inf == b.inf;
    if constexpr (std::is_floating_point_v<T>)
      return approx_eq(a.v, b.v);
    else
      return a.v == b.v;
  }
  static value_type from_real(double v) {
    if (std::isinf(v)) return value_type::infinity();
    if constexpr (std::is_floating_point_v<T>)
      return value_type::finite(static_cast<T>(v));
    else
      return value_type::finite(static_cast<T>(std::llround(v)));
  }
  static std::string to_text(value_type x) {
    if (x.inf) return "inf";
    if constexpr (std::is_floating_point_v<T>)
      return real_to_text(static_cast<double>(x.v));
    else
      return std::to_string(x.v);
  }
};

struct AxiomReport {
  std::vector<std::string> violations;
  std::size_t triples_checked = 0;
  bool ok() const { return violations.empty(); }
};

/// Checks the semiring laws on every (x, y, z) triple drawn from `samples`.
/// Violations are reported by law name; the list is capped so a hopeless
/// instance does not flood the caller.
template <class S>
AxiomReport check_axioms(const std::vector<typename S::value_type>& samples) {
  using V = typename S::value_type;
  AxiomReport rep;
  const std::size_t cap = 32;
  auto note = [&](const char* law) {
    if (rep.violations.size() < cap) rep.violations.push_back(law);
  };
  const V z = S::zero();
  const V o = S::one();
  for (const V& x : samples) {
    if (!S::eq(S::add(x, z), x) || !S::eq(S::add(z, x), x)) note("add-identity");
    if (!S::eq(S::mul(x, o), x) || !S::eq(S::mul(o, x), x)) note("mul-identity");
    if (!S::eq(S::mul(x, z), z) || !S::eq(S::mul(z, x), z)) note("mul-absorb");
  }
  for (const V& x : samples)
    for (const V& y : samples) {
      if (!S::eq(S::add(x, y), S::add(y, x))) note("add-commute");
      for (const V& zz : samples) {
        ++rep.triples_checked;
        if (!S::eq(S::add(S::add(x, y), zz), S::add(x, S::add(y, zz)))) note("add-assoc");
        if (!S::eq(S::mul(S::mul(x, y), zz), S::mul(x, S::mul(y, zz)))) note("mul-assoc");
        if (!S::eq(S::mul(x, S::add(y, zz)), S::add(S::mul(x, y), S::mul(x, zz))))
          note("distribute-left");
        if (!S::eq(S::mul(S::add(x, y), zz), S::add(S::mul(x, zz), S::mul(y, zz))))
          note("distribute-right");
      }
    }
  return rep;
}

}  // namespace etch
