#pragma once

#include <cassert>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "etch/expr.hpp"

// Syntactic streams and lowering. A stream is re-expressed with expression-
// valued index/ready/valid fields and statement-valued init/next fields; a
// whole contraction lowers to one imperative program that accumulates into a
// dense output buffer. The program tree is interpreted directly (prog_interp)
// or transliterated to C (emit_c).

namespace etch::ir {

// ---------------------------------------------------------------------------
// Expressions.

enum class Type { Int, Bool, Val };

struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr {
  enum Kind {
    IntLit, BoolLit, VarInt, ReadInt, ReadVal,
    IAdd, IMul, Min, Max,
    Lt, Le, Eq, And, Or, Not,
    VAdd, VMul, VZero,
  } kind;
  Type type;

  long long ival = 0;  // IntLit
  bool bval = false;   // BoolLit
  std::string name;    // VarInt, ReadInt/ReadVal array name
  ExprP a, b;          // operands; Read*: a is the element index

  Expr(Kind k, Type t) : kind(k), type(t) {}
};

inline ExprP int_lit(long long v) {
  auto e = std::make_shared<Expr>(Expr::IntLit, Type::Int);
  e->ival = v;
  return e;
}

inline ExprP bool_lit(bool v) {
  auto e = std::make_shared<Expr>(Expr::BoolLit, Type::Bool);
  e->bval = v;
  return e;
}

inline ExprP var_int(std::string n) {
  auto e = std::make_shared<Expr>(Expr::VarInt, Type::Int);
  e->name = std::move(n);
  return e;
}

inline ExprP read_int(std::string arr, ExprP at) {
  auto e = std::make_shared<Expr>(Expr::ReadInt, Type::Int);
  e->name = std::move(arr);
  e->a = std::move(at);
  return e;
}

inline ExprP read_val(std::string arr, ExprP at) {
  auto e = std::make_shared<Expr>(Expr::ReadVal, Type::Val);
  e->name = std::move(arr);
  e->a = std::move(at);
  return e;
}

inline ExprP binary(Expr::Kind k, Type t, ExprP a, ExprP b) {
  auto e = std::make_shared<Expr>(k, t);
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

// Constructors fold literal operands so the generated text stays small.

inline ExprP iadd(ExprP a, ExprP b) {
  if (a->kind == Expr::IntLit && b->kind == Expr::IntLit) return int_lit(a->ival + b->ival);
  if (a->kind == Expr::IntLit && a->ival == 0) return b;
  if (b->kind == Expr::IntLit && b->ival == 0) return a;
  return binary(Expr::IAdd, Type::Int, std::move(a), std::move(b));
}

inline ExprP imul(ExprP a, ExprP b) {
  if (a->kind == Expr::IntLit && b->kind == Expr::IntLit) return int_lit(a->ival * b->ival);
  if (a->kind == Expr::IntLit && a->ival == 0) return int_lit(0);
  if (b->kind == Expr::IntLit && b->ival == 0) return int_lit(0);
  if (a->kind == Expr::IntLit && a->ival == 1) return b;
  if (b->kind == Expr::IntLit && b->ival == 1) return a;
  return binary(Expr::IMul, Type::Int, std::move(a), std::move(b));
}

inline ExprP imin(ExprP a, ExprP b) { return binary(Expr::Min, Type::Int, std::move(a), std::move(b)); }
inline ExprP imax(ExprP a, ExprP b) { return binary(Expr::Max, Type::Int, std::move(a), std::move(b)); }
inline ExprP lt(ExprP a, ExprP b) { return binary(Expr::Lt, Type::Bool, std::move(a), std::move(b)); }
inline ExprP le(ExprP a, ExprP b) { return binary(Expr::Le, Type::Bool, std::move(a), std::move(b)); }
inline ExprP eq(ExprP a, ExprP b) { return binary(Expr::Eq, Type::Bool, std::move(a), std::move(b)); }

inline ExprP band(ExprP a, ExprP b) {
  if (a->kind == Expr::BoolLit) return a->bval ? b : a;
  if (b->kind == Expr::BoolLit) return b->bval ? a : b;
  return binary(Expr::And, Type::Bool, std::move(a), std::move(b));
}

inline ExprP bor(ExprP a, ExprP b) {
  if (a->kind == Expr::BoolLit) return a->bval ? a : b;
  if (b->kind == Expr::BoolLit) return b->bval ? b : a;
  return binary(Expr::Or, Type::Bool, std::move(a), std::move(b));
}

inline ExprP bnot(ExprP a) {
  if (a->kind == Expr::BoolLit) return bool_lit(!a->bval);
  auto e = std::make_shared<Expr>(Expr::Not, Type::Bool);
  e->a = std::move(a);
  return e;
}

inline ExprP vadd(ExprP a, ExprP b) { return binary(Expr::VAdd, Type::Val, std::move(a), std::move(b)); }
inline ExprP vmul(ExprP a, ExprP b) { return binary(Expr::VMul, Type::Val, std::move(a), std::move(b)); }
inline ExprP vzero() { return std::make_shared<Expr>(Expr::VZero, Type::Val); }

// ---------------------------------------------------------------------------
// Statements.

struct Stmt;
using StmtP = std::shared_ptr<const Stmt>;

struct Stmt {
  enum Kind { Skip, Assign, DeclInt, Seq, If, If1, While, StoreOut } kind;

  std::string name;     // Assign/DeclInt target
  bool is_init = false; // Assign: a re-initialization rather than a step
  ExprP e;              // Assign/DeclInt value; If/If1/While condition
  StmtP s1, s2;         // Seq halves; If branches; If1/While body
  ExprP out_at;         // StoreOut: flattened output cell
  ExprP out_add;        // StoreOut: the addend

  explicit Stmt(Kind k) : kind(k) {}
};

inline StmtP skip() { return std::make_shared<Stmt>(Stmt::Skip); }

inline StmtP assign(std::string n, ExprP v, bool init) {
  auto s = std::make_shared<Stmt>(Stmt::Assign);
  s->name = std::move(n);
  s->e = std::move(v);
  s->is_init = init;
  return s;
}

inline StmtP decl_int(std::string n, ExprP v) {
  auto s = std::make_shared<Stmt>(Stmt::DeclInt);
  s->name = std::move(n);
  s->e = std::move(v);
  return s;
}

inline StmtP seq(StmtP a, StmtP b) {
  if (!a || a->kind == Stmt::Skip) return b ? b : skip();
  if (!b || b->kind == Stmt::Skip) return a;
  auto s = std::make_shared<Stmt>(Stmt::Seq);
  s->s1 = std::move(a);
  s->s2 = std::move(b);
  return s;
}

inline StmtP if_(ExprP c, StmtP t, StmtP f) {
  if (c->kind == Expr::BoolLit) return c->bval ? t : f;
  auto s = std::make_shared<Stmt>(Stmt::If);
  s->e = std::move(c);
  s->s1 = std::move(t);
  s->s2 = std::move(f);
  return s;
}

inline StmtP if1(ExprP c, StmtP t) {
  if (c->kind == Expr::BoolLit) return c->bval ? t : skip();
  auto s = std::make_shared<Stmt>(Stmt::If1);
  s->e = std::move(c);
  s->s1 = std::move(t);
  return s;
}

inline StmtP while_(ExprP c, StmtP body) {
  auto s = std::make_shared<Stmt>(Stmt::While);
  s->e = std::move(c);
  s->s1 = std::move(body);
  return s;
}

inline StmtP store_out(ExprP at, ExprP add) {
  auto s = std::make_shared<Stmt>(Stmt::StoreOut);
  s->out_at = std::move(at);
  s->out_add = std::move(add);
  return s;
}

// ---------------------------------------------------------------------------
// Syntactic streams. One node per level; the value is either a scalar
// expression or the next level down. init establishes the cursors valid
// reads; next is only run under valid.

struct StreamIR;
using StreamIRPtr = std::unique_ptr<StreamIR>;

struct StreamIR {
  ExprP index;
  ExprP ready;
  ExprP valid;
  StmtP init;
  StmtP next;
  int index_id = -1;        // universe id of this level
  bool contracted = false;  // level is summed away (unit case of lowering)
  bool constant = false;    // full-range level whose value ignores the cursor

  ExprP scalar;        // leaf value, when this is the innermost level
  StreamIRPtr child;   // nested value otherwise
};

// ---------------------------------------------------------------------------
// Primitive stream IR per storage format.

struct FormatInfo {
  bool dense = false;
  int rank = 0;
};

namespace detail {

struct NameGen {
  int n = 0;
  std::string fresh(const std::string& base) { return "t" + std::to_string(n++) + "_" + base; }
};

// Compressed levels: cursor p scans [pos[parent], pos[parent+1]); the index
// is crd[p] and the leaf value vals[p].
inline StreamIRPtr compressed_ir(const std::string& tensor, const std::string& inst,
                                 const std::vector<int>& ids, int level, ExprP parent_pos) {
  auto lv = std::make_unique<StreamIR>();
  std::string p = inst + "_p" + std::to_string(level);
  std::string end = inst + "_e" + std::to_string(level);
  std::string pos = tensor + "_pos" + std::to_string(level);
  std::string crd = tensor + "_crd" + std::to_string(level);
  lv->init = seq(decl_int(p, read_int(pos, parent_pos)),
                 decl_int(end, read_int(pos, iadd(parent_pos, int_lit(1)))));
  lv->valid = lt(var_int(p), var_int(end));
  lv->index = read_int(crd, var_int(p));
  lv->ready = bool_lit(true);
  lv->next = assign(p, iadd(var_int(p), int_lit(1)), false);
  lv->index_id = ids[level];
  if (level + 1 == static_cast<int>(ids.size()))
    lv->scalar = read_val(tensor + "_vals", var_int(p));
  else
    lv->child = compressed_ir(tensor, inst, ids, level + 1, var_int(p));
  return lv;
}

// Dense levels: cursor i counts 0..d; the linearized offset accumulates into
// the leaf vals read.
inline StreamIRPtr dense_ir(const std::string& tensor, const std::string& inst,
                            const std::vector<int>& ids,
                            const std::vector<std::string>& dim_names, int level,
                            ExprP base) {
  auto lv = std::make_unique<StreamIR>();
  std::string i = inst + "_i" + std::to_string(level);
  lv->init = decl_int(i, int_lit(0));
  lv->valid = lt(var_int(i), var_int(dim_names[level]));
  lv->index = var_int(i);
  lv->ready = bool_lit(true);
  lv->next = assign(i, iadd(var_int(i), int_lit(1)), false);
  lv->index_id = ids[level];
  ExprP off = iadd(imul(base, var_int(dim_names[level])), var_int(i));
  if (level + 1 == static_cast<int>(ids.size()))
    lv->scalar = read_val(tensor + "_vals", off);
  else
    lv->child = dense_ir(tensor, inst, ids, dim_names, level + 1, off);
  return lv;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Product of two stream IRs over the same level structure. A constant level
// intersected with anything degenerates to the other side: the constant
// stream holds every index, so the merge loop would only mirror the other
// cursor. Dropping it is what lets a replicated factor ride along for free.

inline ExprP ir_value_mul(const StreamIR& a, const StreamIR& b);

inline StreamIRPtr ir_mul(StreamIRPtr a, StreamIRPtr b) {
  if (a->index_id != b->index_id)
    fail(ErrorKind::ShapeMismatch, "product of levels over different indices");
  if (a->constant || b->constant) {
    StreamIRPtr keep, drop;
    if (a->constant && !b->constant) {
      keep = std::move(b);
      drop = std::move(a);
    } else {
      keep = std::move(a);
      drop = std::move(b);
    }
    if (keep->child) {
      if (!drop->child) fail(ErrorKind::ShapeMismatch, "product of values at different depths");
      keep->child = ir_mul(std::move(keep->child), std::move(drop->child));
    } else {
      if (drop->child) fail(ErrorKind::ShapeMismatch, "product of values at different depths");
      keep->scalar = vmul(keep->scalar, drop->scalar);
    }
    keep->constant = keep->constant && drop->constant;
    return keep;
  }
  auto m = std::make_unique<StreamIR>();
  m->index_id = a->index_id;
  m->index = imax(a->index, b->index);
  m->valid = band(a->valid, b->valid);
  m->ready = band(band(a->ready, b->ready), eq(a->index, b->index));
  m->init = seq(a->init, b->init);
  ExprP step_a = bor(lt(a->index, b->index), band(eq(a->index, b->index), bnot(a->ready)));
  m->next = if_(step_a, a->next, b->next);
  if (a->child) {
    if (!b->child) fail(ErrorKind::ShapeMismatch, "product of values at different depths");
    m->child = ir_mul(std::move(a->child), std::move(b->child));
  } else {
    if (b->child) fail(ErrorKind::ShapeMismatch, "product of values at different depths");
    m->scalar = vmul(a->scalar, b->scalar);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Level surgery for Sum and Rep nodes.

namespace detail {

/// Marks the outermost unmarked level carrying `id` as contracted.
inline void mark_contracted(StreamIR& v, int id) {
  if (v.index_id == id && !v.contracted) {
    v.contracted = true;
    return;
  }
  if (!v.child) fail(ErrorKind::MissingIndex, "no level to contract");
  mark_contracted(*v.child, id);
}

inline StreamIRPtr make_constant_level(int id, const std::string& cursor,
                                       const std::string& dim_name) {
  auto lv = std::make_unique<StreamIR>();
  lv->init = decl_int(cursor, int_lit(0));
  lv->valid = lt(var_int(cursor), var_int(dim_name));
  lv->index = var_int(cursor);
  lv->ready = bool_lit(true);
  lv->next = assign(cursor, iadd(var_int(cursor), int_lit(1)), false);
  lv->index_id = id;
  lv->constant = true;
  return lv;
}

/// Inserts a full-range constant level for `id` at its sorted position.
/// Below the innermost level the old leaf value rides down into the new one.
inline StreamIRPtr insert_constant_level(StreamIRPtr v, int id, const std::string& cursor,
                                         const std::string& dim_name) {
  if (v->index_id >= id) {
    auto lv = make_constant_level(id, cursor, dim_name);
    lv->child = std::move(v);
    return lv;
  }
  if (v->child) {
    v->child = insert_constant_level(std::move(v->child), id, cursor, dim_name);
  } else {
    auto lv = make_constant_level(id, cursor, dim_name);
    lv->scalar = v->scalar;
    v->scalar = nullptr;
    v->child = std::move(lv);
  }
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Term normalization. Addition distributes to the top; summations hoist out
// of products. What remains is a sum of terms, each a Sum/Rep chain over a
// product core, which is the shape the level-merge product can lower.

namespace detail {

inline void split_terms(const ContractionExpr& e, std::vector<ExprPtr>& out) {
  switch (e.kind) {
    case ExprKind::Add:
      split_terms(*e.lhs, out);
      split_terms(*e.rhs, out);
      return;
    case ExprKind::Mul: {
      std::vector<ExprPtr> ls, rs;
      split_terms(*e.lhs, ls);
      split_terms(*e.rhs, rs);
      for (const auto& l : ls)
        for (const auto& r : rs) {
          auto m = make_binary(ExprKind::Mul, l->clone(), r->clone());
          m->shape = e.shape;
          m->span = e.span;
          out.push_back(std::move(m));
        }
      return;
    }
    case ExprKind::Sum:
    case ExprKind::Rep: {
      std::vector<ExprPtr> bs;
      split_terms(*e.lhs, bs);
      for (auto& t : bs) {
        auto n = std::make_unique<ContractionExpr>();
        n->kind = e.kind;
        n->span = e.span;
        n->binder = e.binder;
        n->binder_id = e.binder_id;
        n->shape = e.shape;
        n->lhs = std::move(t);
        out.push_back(std::move(n));
      }
      return;
    }
    case ExprKind::Var:
      out.push_back(e.clone());
      return;
  }
}

inline bool contains_sum(const ContractionExpr& e) {
  if (e.kind == ExprKind::Sum) return true;
  if (e.lhs && contains_sum(*e.lhs)) return true;
  if (e.rhs && contains_sum(*e.rhs)) return true;
  return false;
}

/// Rewrites a term so every Sum has only Sum/Rep ancestors. sum(k, b) under a
/// product pulls out as sum(k, a' * b) with the sibling replicated over k;
/// under rep(j, .) with j != k the two swap. rep(k, sum(k, .)) pins the sum:
/// inside a product that shape has no level-aligned form, so it is rejected.
inline ExprPtr hoist_sums(ExprPtr e, const IndexUniverse& u) {
  switch (e->kind) {
    case ExprKind::Var:
      return e;
    case ExprKind::Sum:
      e->lhs = hoist_sums(std::move(e->lhs), u);
      return e;
    case ExprKind::Rep: {
      e->lhs = hoist_sums(std::move(e->lhs), u);
      if (e->lhs->kind == ExprKind::Sum && e->lhs->binder_id != e->binder_id) {
        ExprPtr s = std::move(e->lhs);
        e->lhs = std::move(s->lhs);
        e->shape = etch::detail::shape_union(e->lhs->shape, {e->binder_id});
        s->lhs = hoist_sums(std::move(e), u);
        std::vector<int> sh;
        const auto& in = s->lhs->shape;
        std::set_difference(in.begin(), in.end(), &s->binder_id, &s->binder_id + 1,
                            std::back_inserter(sh));
        s->shape = std::move(sh);
        return s;
      }
      return e;
    }
    case ExprKind::Mul: {
      e->lhs = hoist_sums(std::move(e->lhs), u);
      e->rhs = hoist_sums(std::move(e->rhs), u);
      for (bool left : {true, false}) {
        ExprPtr& side = left ? e->lhs : e->rhs;
        if (side->kind != ExprKind::Sum) continue;
        ExprPtr s = std::move(side);
        int k = s->binder_id;
        side = std::move(s->lhs);
        ExprPtr& other = left ? e->rhs : e->lhs;
        other = etch::detail::rep_up_to(std::move(other), side->shape, u);
        e->shape = side->shape;
        s->lhs = hoist_sums(std::move(e), u);
        std::vector<int> sh;
        const auto& in = s->lhs->shape;
        std::set_difference(in.begin(), in.end(), &k, &k + 1, std::back_inserter(sh));
        s->shape = std::move(sh);
        return s;
      }
      if (contains_sum(*e))
        fail(ErrorKind::Unsupported,
             "a summation is pinned under a product by a replication of the "
             "same index; this cannot be lowered");
      return e;
    }
    case ExprKind::Add:
      fail(ErrorKind::RuntimeFault, "addition survived distribution");
  }
  fail(ErrorKind::RuntimeFault, "unreachable expression kind");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lowered kernels.

struct TensorParam {
  std::string name;
  FormatInfo format;
};

struct Kernel {
  std::string name;
  std::vector<TensorParam> tensors;     // first-use order
  std::vector<std::string> dim_names;   // d_<index>, global order
  std::vector<int> out_ids;             // free index ids, ascending
  std::vector<std::string> out_dims;    // d_<index> per out id
  StmtP body;
  std::string header;  // expression/order/format summary for the C comment
};

namespace detail {

struct BuildCtx {
  const IndexUniverse* universe;
  const std::map<std::string, FormatInfo>* formats;
  NameGen names;
  std::vector<TensorParam> tensors;
  std::vector<std::string> seen;

  std::string dim_name(int id) const { return "d_" + universe->name_of(id); }

  void note_tensor(const std::string& n) {
    for (const auto& s : seen)
      if (s == n) return;
    seen.push_back(n);
    tensors.push_back({n, formats->at(n)});
  }
};

inline StreamIRPtr build_term(const ContractionExpr& e, BuildCtx& ctx) {
  switch (e.kind) {
    case ExprKind::Var: {
      auto it = ctx.formats->find(e.var);
      if (it == ctx.formats->end())
        fail(ErrorKind::UnboundVariable, "no format for " + e.var);
      ctx.note_tensor(e.var);
      std::string inst = ctx.names.fresh(e.var);
      if (e.shape.empty()) fail(ErrorKind::Unsupported, "rank-0 tensors cannot be lowered");
      if (it->second.dense) {
        std::vector<std::string> dims;
        for (int id : e.shape) dims.push_back(ctx.dim_name(id));
        return dense_ir(e.var, inst, e.shape, dims, 0, int_lit(0));
      }
      return compressed_ir(e.var, inst, e.shape, 0, int_lit(0));
    }
    case ExprKind::Mul: {
      auto l = build_term(*e.lhs, ctx);  // left before right: params keep source order
      auto r = build_term(*e.rhs, ctx);
      return ir_mul(std::move(l), std::move(r));
    }
    case ExprKind::Rep: {
      auto body = build_term(*e.lhs, ctx);
      std::string cursor = ctx.names.fresh("r_" + ctx.universe->name_of(e.binder_id));
      return insert_constant_level(std::move(body), e.binder_id, cursor,
                                   ctx.dim_name(e.binder_id));
    }
    case ExprKind::Sum: {
      auto body = build_term(*e.lhs, ctx);
      mark_contracted(*body, e.binder_id);
      return body;
    }
    case ExprKind::Add:
      fail(ErrorKind::RuntimeFault, "addition survived distribution");
  }
  fail(ErrorKind::RuntimeFault, "unreachable expression kind");
}

/// The three-case evaluation: scalars accumulate into the current cell,
/// contracted levels loop without touching the cell address, free levels
/// specialize it with their index.
inline StmtP lower_level(const StreamIR& v, std::vector<ExprP>& free_idx,
                         const std::vector<std::string>& out_dims) {
  StmtP inner;
  if (!v.contracted) free_idx.push_back(v.index);
  if (v.child) {
    inner = lower_level(*v.child, free_idx, out_dims);
  } else {
    ExprP flat = int_lit(0);
    for (std::size_t k = 0; k < free_idx.size(); ++k)
      flat = iadd(imul(flat, var_int(out_dims[k])), free_idx[k]);
    inner = store_out(flat, v.scalar);
  }
  if (!v.contracted) free_idx.pop_back();
  StmtP body = seq(if1(v.ready, inner), v.next);
  return seq(v.init, while_(v.valid, body));
}

}  // namespace detail

/// Lowers a sorted expression to one program: terms of the distributed form
/// are lowered one after another, all accumulating into the same dense output
/// buffer, which the caller provides zero-initialized.
inline Kernel lower(const SortedExpr& sorted, const std::map<std::string, FormatInfo>& formats,
                    const std::string& kernel_name) {
  Kernel k;
  k.name = kernel_name;
  k.out_ids = sorted.root->shape;
  for (int id = 0; id < sorted.universe.rank(); ++id)
    k.dim_names.push_back("d_" + sorted.universe.name_of(id));
  for (int id : k.out_ids) k.out_dims.push_back(k.dim_names[static_cast<std::size_t>(id)]);

  std::vector<ExprPtr> terms;
  detail::split_terms(*sorted.root, terms);

  detail::BuildCtx ctx;
  ctx.universe = &sorted.universe;
  ctx.formats = &formats;

  StmtP body = skip();
  for (auto& t : terms) {
    ExprPtr norm = detail::hoist_sums(std::move(t), sorted.universe);
    auto irt = detail::build_term(*norm, ctx);
    std::vector<ExprP> free_idx;
    body = seq(body, detail::lower_level(*irt, free_idx, k.out_dims));
  }
  k.body = body;
  k.tensors = ctx.tensors;

  k.header = " * " + kernel_name + ": " + to_text(*sorted.root) + "\n * index order:";
  for (int id = 0; id < sorted.universe.rank(); ++id)
    k.header += (id ? ", " : " ") + sorted.universe.name_of(id);
  k.header += "\n *";
  for (std::size_t i = 0; i < k.tensors.size(); ++i) {
    const auto& t = k.tensors[i];
    k.header += (i ? "; " : " ") + t.name + ": " +
                (t.format.dense ? "dense" : "compressed") + " rank " +
                std::to_string(t.format.rank);
  }
  k.header += "\n";
  return k;
}

}  // namespace etch::ir
