#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "etch/combinators.hpp"
#include "etch/emit_c.hpp"
#include "etch/expr.hpp"
#include "etch/formats.hpp"
#include "etch/ir.hpp"
#include "etch/prog_interp.hpp"
#include "etch/semiring.hpp"
#include "etch/tensor_io.hpp"

// The batch driver behind `etchc eval`: load bindings, sort the expression,
// then evaluate with stream combinators, run the lowered program, or emit C.

namespace etch {

struct BindingSpec {
  std::string name;
  std::string path;
  std::string format;  // dcsr | dense
  std::vector<std::string> indices;
};

struct RunConfig {
  std::string expr_text;
  std::string preset;
  std::vector<std::string> bind_specs;  // name=path:format:indexlist
  std::string semiring = "f64";
  std::vector<std::string> order;  // explicit index order, empty for default
  std::string backend = "interpret";
  std::string out_path;  // empty writes to stdout
  bool metrics = false;
  std::uint64_t budget = Budget::kDefaultLimit;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline BindingSpec parse_binding(const std::string& raw) {
  auto eq = raw.find('=');
  if (eq == std::string::npos)
    fail(ErrorKind::Unsupported, "--bind expects name=path:format:indexlist, got '" + raw + "'");
  BindingSpec b;
  b.name = raw.substr(0, eq);
  auto rest = split(raw.substr(eq + 1), ':');
  if (rest.size() != 3 || b.name.empty() || rest[0].empty())
    fail(ErrorKind::Unsupported, "--bind expects name=path:format:indexlist, got '" + raw + "'");
  b.path = rest[0];
  b.format = rest[1];
  if (b.format == "csf" || b.format == "sparse") b.format = "dcsr";
  if (b.format != "dcsr" && b.format != "dense")
    fail(ErrorKind::Unsupported, "unknown format '" + rest[1] + "' (use dcsr or dense)");
  for (const auto& ix : split(rest[2], ',')) {
    if (ix.empty()) fail(ErrorKind::Unsupported, "empty index name in '" + raw + "'");
    b.indices.push_back(ix);
  }
  return b;
}

inline std::string preset_expr(const std::string& name) {
  if (name == "mmul1") return "sum(j, A(i,j) * B(j,k))";
  if (name == "mmul2") return "sum(k, A(i,k) * B(j,k))";
  if (name == "ttv") return "sum(k, C(i,j,k) * v(k))";
  if (name == "ttm") return "sum(l, C(i,j,l) * A(k,l))";
  if (name == "mttkrp") return "sum(j, sum(k, C(i,j,k) * A(j,l) * B(k,l)))";
  if (name == "inner3") return "sum(i, sum(j, sum(k, C(i,j,k) * Cp(i,j,k))))";
  fail(ErrorKind::Unsupported, "unknown preset '" + name + "'");
}

inline bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

template <class S>
struct BoundTensor {
  BindingSpec spec;
  std::shared_ptr<const CompressedTensor<typename S::value_type>> compressed;
  std::shared_ptr<const DenseTensor<typename S::value_type>> dense;
};

template <class S>
BoundTensor<S> load_binding(const BindingSpec& spec) {
  using R = typename S::value_type;
  LoadedTensor<R> raw;
  if (ends_with(spec.path, ".mtx")) {
    raw = load_matrix_market<S>(spec.path);
  } else if (ends_with(spec.path, ".tns")) {
    raw = load_frostt<S>(spec.path, static_cast<int>(spec.indices.size()));
  } else {
    fail(ErrorKind::MalformedFormat, "'" + spec.path + "': unknown extension (use .mtx or .tns)");
  }
  if (raw.dims.size() != spec.indices.size())
    fail(ErrorKind::RankMismatch, spec.name + ": file has rank " +
                                      std::to_string(raw.dims.size()) + " but binding names " +
                                      std::to_string(spec.indices.size()) + " indices");
  BoundTensor<S> t;
  t.spec = spec;
  if (spec.format == "dense")
    t.dense = std::make_shared<const DenseTensor<R>>(build_dense<S>(raw.entries, raw.dims));
  else
    t.compressed =
        std::make_shared<const CompressedTensor<R>>(build_compressed<S>(raw.entries, raw.dims));
  return t;
}

template <class S>
int run_typed(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using R = typename S::value_type;

  std::string text = cfg.preset.empty() ? cfg.expr_text : preset_expr(cfg.preset);
  if (text.empty()) fail(ErrorKind::Unsupported, "no expression: pass --expr or --preset");
  auto parsed = parse(text);

  Bindings binds;
  std::map<std::string, BoundTensor<S>> tensors;
  for (const auto& rawspec : cfg.bind_specs) {
    BindingSpec spec = parse_binding(rawspec);
    if (tensors.count(spec.name))
      fail(ErrorKind::Unsupported, "duplicate binding for '" + spec.name + "'");
    auto t = load_binding<S>(spec);
    TensorBinding b;
    b.indices = spec.indices;
    const auto& dims = t.dense ? t.dense->dims : t.compressed->dims;
    b.dims.assign(dims.begin(), dims.end());
    binds[spec.name] = std::move(b);
    tensors.emplace(spec.name, std::move(t));
  }

  SortedExpr sorted = infer_sorts(*parsed, binds, cfg.order);

  auto emit_result = [&](const SparseVariable<R>& var) {
    if (cfg.out_path.empty())
      write_frostt<S>(out, var);
    else
      write_frostt<S>(cfg.out_path, var);
  };

  if (cfg.backend == "interpret") {
    std::map<std::string, ValueSource<R>> sources;
    for (const auto& [name, t] : tensors) {
      if (t.dense) {
        auto ptr = t.dense;
        sources[name] = [ptr] { return Value<R>(stream_of_dense(ptr)); };
      } else {
        auto ptr = t.compressed;
        sources[name] = [ptr] { return Value<R>(stream_of_compressed(ptr)); };
      }
    }
    auto budget = std::make_shared<Budget>(cfg.budget);
    reset_op_counts();
    Value<R> result = interpret<S>(*sorted.root, sorted.universe, sources, budget);
    SparseVariable<R> var;
    if (result.is_scalar()) {
      var.shape = {};
      var.template accumulate<S>(Coord{}, result.scalar());
      var = var.template normalized<S>();
    } else {
      var = eval_nested<S>(result.stream(), *budget, sorted.root->shape);
    }
    OpCounts ops = op_counts();
    emit_result(var);
    if (cfg.metrics) {
      SizeMetrics m;
      if (!result.is_scalar()) {
        Budget side(cfg.budget);
        m = measure(result.stream(), side);
      } else {
        m.size0 = 1;
        m.size = 1;
      }
      err << "size0: " << m.size0 << "\n";
      err << "size: " << m.size << "\n";
      err << "advances: " << ops.advances << "\n";
      err << "skips: " << ops.skips << "\n";
    }
    return 0;
  }

  if (cfg.backend == "prog" || cfg.backend == "emit-c") {
    std::map<std::string, ir::FormatInfo> formats;
    for (const auto& [name, t] : tensors)
      formats[name] = {t.spec.format == "dense", static_cast<int>(t.spec.indices.size())};
    std::string kname = cfg.preset.empty() ? "kernel" : cfg.preset;
    ir::Kernel k = ir::lower(sorted, formats, kname);

    if (cfg.backend == "emit-c") {
      std::string src = emit_c<S>(k);
      if (cfg.out_path.empty()) {
        out << src;
      } else {
        std::ofstream f(cfg.out_path);
        if (!f) fail(ErrorKind::Io, "cannot open '" + cfg.out_path + "' for writing");
        f << src;
        if (!f) fail(ErrorKind::Io, "write failed on '" + cfg.out_path + "'");
      }
      return 0;
    }

    ir::ProgInputs<S> inputs;
    for (const auto& [name, t] : tensors) {
      if (t.dense)
        bind_tensor(inputs, name, *t.dense);
      else
        bind_tensor(inputs, name, *t.compressed);
    }
    for (int id = 0; id < sorted.universe.rank(); ++id)
      inputs.dims["d_" + sorted.universe.name_of(id)] = sorted.universe.size_of(id);
    ir::InterpStats stats;
    SparseVariable<R> var = ir::run_prog<S>(k, inputs, &stats);
    emit_result(var);
    if (cfg.metrics) {
      err << "stores: " << stats.stores << "\n";
      err << "writes-per-output: " << stats.max_gap_locations << "\n";
      err << "monotone: " << (stats.cursors_monotone ? "yes" : "no") << "\n";
    }
    return 0;
  }

  fail(ErrorKind::Unsupported, "unknown backend '" + cfg.backend + "'");
}

}  // namespace detail

/// Exit code policy: 0 success; 1 expression language faults; 2 file faults;
/// 3 resource and lowering faults.
inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Io:
    case ErrorKind::ParseFile:
    case ErrorKind::Bounds:
    case ErrorKind::MalformedFormat:
      return 2;
    case ErrorKind::Budget:
    case ErrorKind::RuntimeFault:
    case ErrorKind::Unsupported:
      return 3;
    default:
      return 1;
  }
}

inline int run(RunConfig cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  if (const char* env = std::getenv("ETCH_STATE_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) {
      err << "error: Unsupported: ETCH_STATE_BUDGET must be a positive integer\n";
      return 3;
    }
    cfg.budget = v;
  }
  try {
    if (cfg.semiring == "f64" || cfg.semiring == "float")
      return detail::run_typed<Arithmetic>(cfg, out, err);
    if (cfg.semiring == "int") return detail::run_typed<Integer>(cfg, out, err);
    if (cfg.semiring == "bool") return detail::run_typed<Boolean>(cfg, out, err);
    if (cfg.semiring == "minplus" || cfg.semiring == "tropical")
      return detail::run_typed<MinPlus<double>>(cfg, out, err);
    fail(ErrorKind::Unsupported, "unknown semiring '" + cfg.semiring + "'");
  } catch (const Error& e) {
    err << "error: " << kind_name(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace etch
