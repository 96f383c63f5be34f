#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "etch/formats.hpp"
#include "etch/ir.hpp"
#include "etch/variable.hpp"

// Reference execution of lowered programs. The interpreter is the oracle for
// the C emitter and doubles as the measurement bench: it tracks how many
// distinct locations are written between consecutive output stores and
// whether every cursor only moves forward.

namespace etch::ir {

struct InterpStats {
  std::uint64_t stores = 0;          // output store events
  std::uint64_t int_writes = 0;      // cursor declarations and assignments
  std::uint64_t max_gap_locations = 0;  // worst distinct-location count between stores
  bool cursors_monotone = true;      // no non-init assignment ever decreased a cursor
};

template <class S>
struct ProgInputs {
  std::map<std::string, std::vector<Index>> int_arrays;  // pos/crd
  std::map<std::string, std::vector<typename S::value_type>> val_arrays;
  std::map<std::string, long long> dims;  // d_<index> sizes
};

/// Register a tensor's arrays under its binding name.
template <class S>
void bind_tensor(ProgInputs<S>& in, const std::string& name,
                 const CompressedTensor<typename S::value_type>& t) {
  for (std::size_t l = 0; l < t.levels.size(); ++l) {
    in.int_arrays[name + "_pos" + std::to_string(l)] = t.levels[l].pos;
    in.int_arrays[name + "_crd" + std::to_string(l)] = t.levels[l].crd;
  }
  in.val_arrays[name + "_vals"] = t.vals;
}

template <class S>
void bind_tensor(ProgInputs<S>& in, const std::string& name,
                 const DenseTensor<typename S::value_type>& t) {
  in.val_arrays[name + "_vals"] = t.vals;
}

namespace detail {

template <class S>
struct ProgEnv {
  using R = typename S::value_type;

  const ProgInputs<S>* in;
  std::map<std::string, long long> ints;
  std::vector<R> out;
  std::vector<long long> out_dims;
  InterpStats stats;
  std::set<std::string> gap;  // locations written since the last store
  std::uint64_t steps = 0;
  std::uint64_t step_limit;

  void tick() {
    if (++steps > step_limit)
      fail(ErrorKind::Budget, "program ran past its step limit");
  }

  long long eval_int(const Expr& e) {
    switch (e.kind) {
      case Expr::IntLit: return e.ival;
      case Expr::VarInt: {
        auto it = ints.find(e.name);
        if (it == ints.end()) {
          auto dit = in->dims.find(e.name);
          if (dit != in->dims.end()) return dit->second;
          fail(ErrorKind::RuntimeFault, "read of undeclared variable " + e.name);
        }
        return it->second;
      }
      case Expr::ReadInt: {
        auto it = in->int_arrays.find(e.name);
        if (it == in->int_arrays.end())
          fail(ErrorKind::RuntimeFault, "read of unknown array " + e.name);
        long long at = eval_int(*e.a);
        if (at < 0 || at >= static_cast<long long>(it->second.size()))
          fail(ErrorKind::RuntimeFault, e.name + " read out of bounds");
        return it->second[static_cast<std::size_t>(at)];
      }
      case Expr::IAdd: return eval_int(*e.a) + eval_int(*e.b);
      case Expr::IMul: return eval_int(*e.a) * eval_int(*e.b);
      case Expr::Min: return std::min(eval_int(*e.a), eval_int(*e.b));
      case Expr::Max: return std::max(eval_int(*e.a), eval_int(*e.b));
      default: fail(ErrorKind::RuntimeFault, "expected an integer expression");
    }
  }

  bool eval_bool(const Expr& e) {
    switch (e.kind) {
      case Expr::BoolLit: return e.bval;
      case Expr::Lt: return eval_int(*e.a) < eval_int(*e.b);
      case Expr::Le: return eval_int(*e.a) <= eval_int(*e.b);
      case Expr::Eq: return eval_int(*e.a) == eval_int(*e.b);
      case Expr::And: return eval_bool(*e.a) && eval_bool(*e.b);
      case Expr::Or: return eval_bool(*e.a) || eval_bool(*e.b);
      case Expr::Not: return !eval_bool(*e.a);
      default: fail(ErrorKind::RuntimeFault, "expected a boolean expression");
    }
  }

  R eval_val(const Expr& e) {
    switch (e.kind) {
      case Expr::VZero: return S::zero();
      case Expr::ReadVal: {
        auto it = in->val_arrays.find(e.name);
        if (it == in->val_arrays.end())
          fail(ErrorKind::RuntimeFault, "read of unknown array " + e.name);
        long long at = eval_int(*e.a);
        if (at < 0 || at >= static_cast<long long>(it->second.size()))
          fail(ErrorKind::RuntimeFault, e.name + " read out of bounds");
        return it->second[static_cast<std::size_t>(at)];
      }
      case Expr::VAdd: return S::add(eval_val(*e.a), eval_val(*e.b));
      case Expr::VMul: return S::mul(eval_val(*e.a), eval_val(*e.b));
      default: fail(ErrorKind::RuntimeFault, "expected a value expression");
    }
  }

  void write_int(const std::string& name, long long v, bool is_init) {
    auto it = ints.find(name);
    if (!is_init && it == ints.end())
      fail(ErrorKind::RuntimeFault, "assignment to undeclared variable " + name);
    if (!is_init && v < it->second) stats.cursors_monotone = false;
    if (it == ints.end())
      ints.emplace(name, v);
    else
      it->second = v;
    ++stats.int_writes;
    gap.insert(name);
  }

  void exec(const Stmt& s) {
    tick();
    switch (s.kind) {
      case Stmt::Skip: return;
      case Stmt::DeclInt:
        write_int(s.name, eval_int(*s.e), true);
        return;
      case Stmt::Assign:
        write_int(s.name, eval_int(*s.e), s.is_init);
        return;
      case Stmt::Seq:
        exec(*s.s1);
        exec(*s.s2);
        return;
      case Stmt::If:
        if (eval_bool(*s.e))
          exec(*s.s1);
        else
          exec(*s.s2);
        return;
      case Stmt::If1:
        if (eval_bool(*s.e)) exec(*s.s1);
        return;
      case Stmt::While:
        while (eval_bool(*s.e)) exec(*s.s1);
        return;
      case Stmt::StoreOut: {
        long long at = eval_int(*s.out_at);
        if (at < 0 || at >= static_cast<long long>(out.size()))
          fail(ErrorKind::RuntimeFault, "output store out of bounds");
        out[static_cast<std::size_t>(at)] =
            S::add(out[static_cast<std::size_t>(at)], eval_val(*s.out_add));
        ++stats.stores;
        if (gap.size() > stats.max_gap_locations)
          stats.max_gap_locations = gap.size();
        gap.clear();
        return;
      }
    }
  }
};

}  // namespace detail

/// Runs a lowered kernel against bound inputs and reads the dense output
/// buffer back as a variable (explicit zeros normalized away).
template <class S>
SparseVariable<typename S::value_type> run_prog(const Kernel& k, const ProgInputs<S>& in,
                                                InterpStats* stats = nullptr,
                                                std::uint64_t step_limit = 200'000'000) {
  using R = typename S::value_type;
  detail::ProgEnv<S> env;
  env.in = &in;
  env.step_limit = step_limit;

  long long cells = 1;
  for (const auto& dn : k.out_dims) {
    auto it = in.dims.find(dn);
    if (it == in.dims.end()) fail(ErrorKind::RuntimeFault, "missing dimension " + dn);
    env.out_dims.push_back(it->second);
    cells *= it->second;
    if (cells < 0 || cells > (1LL << 26))
      fail(ErrorKind::Budget, "output buffer too large");
  }
  env.out.assign(static_cast<std::size_t>(cells), S::zero());

  env.exec(*k.body);
  if (env.gap.size() > env.stats.max_gap_locations)
    env.stats.max_gap_locations = env.gap.size();
  if (stats) *stats = env.stats;

  SparseVariable<R> var;
  var.shape = k.out_ids;
  for (long long cell = 0; cell < cells; ++cell) {
    Coord c(k.out_ids.size());
    long long rem = cell;
    for (int d = static_cast<int>(env.out_dims.size()) - 1; d >= 0; --d) {
      c[static_cast<std::size_t>(d)] = static_cast<Index>(rem % env.out_dims[static_cast<std::size_t>(d)]);
      rem /= env.out_dims[static_cast<std::size_t>(d)];
    }
    var.template accumulate<S>(c, env.out[static_cast<std::size_t>(cell)]);
  }
  return var.template normalized<S>();
}

}  // namespace etch::ir
