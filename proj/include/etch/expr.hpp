#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "etch/combinators.hpp"
#include "etch/index.hpp"
#include "etch/oracle.hpp"
#include "etch/stream.hpp"

// Contraction expressions: a small named-index language
//
//   expr   := term ('+' term)*
//   term   := factor ('*' factor)*
//   factor := ident '(' ident-list ')' | 'sum' '(' ident ',' expr ')' | '(' expr ')'
//
// parsed into trees, sorted against tensor bindings (shape inference plus
// automatic replication insertion), and interpreted either as nested streams
// or as whole variables.

namespace etch {

struct SourceSpan {
  int begin = 0;
  int end = 0;
};

enum class ExprKind { Var, Mul, Add, Sum, Rep };

struct ContractionExpr;
using ExprPtr = std::unique_ptr<ContractionExpr>;

struct ContractionExpr {
  ExprKind kind{};
  SourceSpan span;

  std::string var;                   // Var: bound tensor name
  std::vector<std::string> indices;  // Var: index names as written

  std::string binder;  // Sum/Rep: the bound index name

  ExprPtr lhs;  // Mul/Add: left operand; Sum/Rep: the body
  ExprPtr rhs;  // Mul/Add: right operand

  // Filled by infer_sorts.
  std::vector<int> shape;  // index ids, ascending in the global order
  int binder_id = -1;      // Sum/Rep: id of `binder`

  ExprPtr clone() const {
    auto c = std::make_unique<ContractionExpr>();
    c->kind = kind;
    c->span = span;
    c->var = var;
    c->indices = indices;
    c->binder = binder;
    if (lhs) c->lhs = lhs->clone();
    if (rhs) c->rhs = rhs->clone();
    c->shape = shape;
    c->binder_id = binder_id;
    return c;
  }
};

inline ExprPtr make_var(std::string name, std::vector<std::string> idx, SourceSpan sp = {}) {
  auto e = std::make_unique<ContractionExpr>();
  e->kind = ExprKind::Var;
  e->var = std::move(name);
  e->indices = std::move(idx);
  e->span = sp;
  return e;
}

inline ExprPtr make_binary(ExprKind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_unique<ContractionExpr>();
  e->kind = k;
  e->span = {a->span.begin, b->span.end};
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

inline ExprPtr make_sum(std::string idx, ExprPtr body, SourceSpan sp = {}) {
  auto e = std::make_unique<ContractionExpr>();
  e->kind = ExprKind::Sum;
  e->binder = std::move(idx);
  e->span = sp.end > 0 ? sp : body->span;
  e->lhs = std::move(body);
  return e;
}

inline ExprPtr make_rep(std::string idx, ExprPtr body) {
  auto e = std::make_unique<ContractionExpr>();
  e->kind = ExprKind::Rep;
  e->binder = std::move(idx);
  e->span = body->span;
  e->lhs = std::move(body);
  return e;
}

// ---------------------------------------------------------------------------
// Parsing.

namespace detail {

struct Token {
  enum Type { Ident, LParen, RParen, Comma, Plus, Star, End } type;
  std::string text;
  int pos;  // 0-based offset into the source
};

[[noreturn]] inline void syntax_error(const std::string& what, int pos) {
  fail(ErrorKind::Syntax, what + " at column " + std::to_string(pos + 1));
}

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    int pos = static_cast<int>(i);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({Token::Ident, src.substr(i, j - i), pos});
      i = j;
      continue;
    }
    switch (c) {
      case '(': out.push_back({Token::LParen, "(", pos}); break;
      case ')': out.push_back({Token::RParen, ")", pos}); break;
      case ',': out.push_back({Token::Comma, ",", pos}); break;
      case '+': out.push_back({Token::Plus, "+", pos}); break;
      case '*': out.push_back({Token::Star, "*", pos}); break;
      default: syntax_error(std::string("unexpected character '") + c + "'", pos);
    }
    ++i;
  }
  out.push_back({Token::End, "", static_cast<int>(src.size())});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ExprPtr parse_all() {
    ExprPtr e = parse_expr();
    if (peek().type != Token::End) syntax_error("trailing input", peek().pos);
    return e;
  }

 private:
  const Token& peek() const { return toks_[at_]; }
  Token take() { return toks_[at_++]; }

  Token expect(Token::Type t, const char* what) {
    if (peek().type != t) syntax_error(std::string("expected ") + what, peek().pos);
    return take();
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    while (peek().type == Token::Plus) {
      take();
      e = make_binary(ExprKind::Add, std::move(e), parse_term());
    }
    return e;
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    while (peek().type == Token::Star) {
      take();
      e = make_binary(ExprKind::Mul, std::move(e), parse_factor());
    }
    return e;
  }

  ExprPtr parse_factor() {
    if (peek().type == Token::LParen) {
      take();
      ExprPtr e = parse_expr();
      expect(Token::RParen, "')'");
      return e;
    }
    Token head = expect(Token::Ident, "a name");
    if (head.text == "sum") {
      Token lp = expect(Token::LParen, "'(' after sum");
      (void)lp;
      Token idx = expect(Token::Ident, "an index name");
      expect(Token::Comma, "','");
      ExprPtr body = parse_expr();
      Token rp = expect(Token::RParen, "')'");
      return make_sum(idx.text, std::move(body), {head.pos, rp.pos + 1});
    }
    expect(Token::LParen, "'(' after tensor name");
    std::vector<std::string> idx;
    idx.push_back(expect(Token::Ident, "an index name").text);
    while (peek().type == Token::Comma) {
      take();
      idx.push_back(expect(Token::Ident, "an index name").text);
    }
    Token rp = expect(Token::RParen, "')'");
    return make_var(head.text, std::move(idx), {head.pos, rp.pos + 1});
  }

  std::vector<Token> toks_;
  std::size_t at_ = 0;
};

}  // namespace detail

inline ExprPtr parse(const std::string& text) {
  return detail::Parser(detail::lex(text)).parse_all();
}

// ---------------------------------------------------------------------------
// Sorting: shape inference against bindings, with replication insertion.

struct TensorBinding {
  std::vector<std::string> indices;  // axis names, outermost first
  std::vector<int> dims;             // axis domain sizes, same length
};

using Bindings = std::map<std::string, TensorBinding>;

struct SortedExpr {
  ExprPtr root;            // tree with shapes filled and Rep nodes inserted
  IndexUniverse universe;  // names in global order, with domain sizes
};

namespace detail {

struct MentionScan {
  std::vector<std::string> order;                       // first-mention order
  std::vector<std::pair<std::string, std::string>> lt;  // a must precede b
};

inline void scan_mentions(const ContractionExpr& e, MentionScan& m,
                          std::set<std::string>& seen) {
  auto mention = [&](const std::string& n) {
    if (seen.insert(n).second) m.order.push_back(n);
  };
  switch (e.kind) {
    case ExprKind::Var:
      for (std::size_t k = 0; k < e.indices.size(); ++k) {
        mention(e.indices[k]);
        if (k + 1 < e.indices.size()) m.lt.push_back({e.indices[k], e.indices[k + 1]});
      }
      break;
    case ExprKind::Sum:
      mention(e.binder);
      scan_mentions(*e.lhs, m, seen);
      break;
    case ExprKind::Rep:
      // Synthesized binders do not influence the order; re-sorting a sorted
      // tree must reproduce it.
      scan_mentions(*e.lhs, m, seen);
      break;
    case ExprKind::Mul:
    case ExprKind::Add:
      scan_mentions(*e.lhs, m, seen);
      scan_mentions(*e.rhs, m, seen);
      break;
  }
}

// Smallest-first-mention topological order under the access chains. Every
// tensor access fixes the relative order of its own indices, so the global
// order must extend all of them; first mention only breaks ties.
inline std::vector<std::string> default_order(const MentionScan& m) {
  std::map<std::string, std::set<std::string>> preds;
  std::map<std::string, std::vector<std::string>> succs;
  for (const auto& n : m.order) preds[n];
  for (const auto& [a, b] : m.lt) {
    if (preds[b].insert(a).second) succs[a].push_back(b);
  }
  std::vector<std::string> out;
  std::set<std::string> placed;
  while (out.size() < m.order.size()) {
    const std::string* pick = nullptr;
    for (const auto& n : m.order) {
      if (placed.count(n)) continue;
      bool blocked = false;
      for (const auto& p : preds[n])
        if (!placed.count(p)) {
          blocked = true;
          break;
        }
      if (!blocked) {
        pick = &n;
        break;
      }
    }
    if (!pick)
      fail(ErrorKind::OrderMismatch,
           "accesses admit no single index order; give one with --order");
    out.push_back(*pick);
    placed.insert(*pick);
  }
  return out;
}

inline std::vector<int> shape_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> u;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
  return u;
}

// Wrap `e` in Rep nodes until its shape becomes `target` (a superset).
inline ExprPtr rep_up_to(ExprPtr e, const std::vector<int>& target,
                         const IndexUniverse& u) {
  std::vector<int> missing;
  std::set_difference(target.begin(), target.end(), e->shape.begin(), e->shape.end(),
                      std::back_inserter(missing));
  for (int id : missing) {
    auto r = make_rep(u.name_of(id), std::move(e));
    r->binder_id = id;
    r->shape = shape_union(r->lhs->shape, {id});
    e = std::move(r);
  }
  return e;
}

inline ExprPtr sort_walk(const ContractionExpr& e, const Bindings& b,
                         const IndexUniverse& u) {
  switch (e.kind) {
    case ExprKind::Var: {
      auto it = b.find(e.var);
      if (it == b.end()) fail(ErrorKind::UnboundVariable, "unbound variable " + e.var);
      const TensorBinding& tb = it->second;
      if (tb.indices.size() != e.indices.size())
        fail(ErrorKind::RankMismatch,
             e.var + " is bound with rank " + std::to_string(tb.indices.size()) +
                 " but used with " + std::to_string(e.indices.size()) + " indices");
      if (tb.indices != e.indices)
        fail(ErrorKind::ShapeMismatch,
             e.var + " is used with indices that differ from its binding");
      auto out = e.clone();
      out->shape.clear();
      for (const auto& n : e.indices) out->shape.push_back(u.require(n));
      for (std::size_t k = 0; k + 1 < out->shape.size(); ++k)
        if (out->shape[k] >= out->shape[k + 1])
          fail(ErrorKind::OrderMismatch,
               "access " + e.var + " conflicts with the index order");
      return out;
    }
    case ExprKind::Sum: {
      auto body = sort_walk(*e.lhs, b, u);
      int id = u.find(e.binder);
      if (id < 0 || !std::binary_search(body->shape.begin(), body->shape.end(), id))
        fail(ErrorKind::MissingIndex,
             "sum over " + e.binder + ", which the body does not carry");
      auto out = std::make_unique<ContractionExpr>();
      out->kind = ExprKind::Sum;
      out->span = e.span;
      out->binder = e.binder;
      out->binder_id = id;
      std::set_difference(body->shape.begin(), body->shape.end(), &id, &id + 1,
                          std::back_inserter(out->shape));
      out->lhs = std::move(body);
      return out;
    }
    case ExprKind::Rep: {
      auto body = sort_walk(*e.lhs, b, u);
      int id = u.require(e.binder);
      if (std::binary_search(body->shape.begin(), body->shape.end(), id))
        fail(ErrorKind::IndexPresent,
             "replication over " + e.binder + ", which the body already carries");
      auto out = make_rep(e.binder, std::move(body));
      out->binder_id = id;
      out->shape = shape_union(out->lhs->shape, {id});
      return out;
    }
    case ExprKind::Mul:
    case ExprKind::Add: {
      auto l = sort_walk(*e.lhs, b, u);
      auto r = sort_walk(*e.rhs, b, u);
      auto target = shape_union(l->shape, r->shape);
      l = rep_up_to(std::move(l), target, u);
      r = rep_up_to(std::move(r), target, u);
      auto out = make_binary(e.kind, std::move(l), std::move(r));
      out->span = e.span;
      out->shape = target;
      return out;
    }
  }
  fail(ErrorKind::RuntimeFault, "unreachable expression kind");
}

}  // namespace detail

/// Shape inference. Every Var must match its binding's index list exactly;
/// Mul and Add operands are brought to the union shape by inserting Rep
/// nodes; Sum checks its index is present. The global order is `order` when
/// given, otherwise the smallest first-mention order compatible with every
/// access. Deterministic and idempotent.
inline SortedExpr infer_sorts(const ContractionExpr& e, const Bindings& b,
                              const std::vector<std::string>& order = {}) {
  // Validate occurrence lists before anything else.
  {
    std::function<void(const ContractionExpr&)> walk = [&](const ContractionExpr& n) {
      if (n.kind == ExprKind::Var) {
        std::set<std::string> uniq(n.indices.begin(), n.indices.end());
        if (uniq.size() != n.indices.size())
          fail(ErrorKind::DuplicateIndex, n.var + " uses an index twice");
      }
      if (n.lhs) walk(*n.lhs);
      if (n.rhs) walk(*n.rhs);
    };
    walk(e);
  }

  detail::MentionScan m;
  {
    std::set<std::string> seen;
    detail::scan_mentions(e, m, seen);
  }

  std::vector<std::string> global;
  if (!order.empty()) {
    std::set<std::string> mentioned(m.order.begin(), m.order.end());
    std::set<std::string> given;
    for (const auto& n : order) {
      if (!given.insert(n).second)
        fail(ErrorKind::DuplicateIndex, "index " + n + " repeats in the order");
      if (mentioned.count(n)) global.push_back(n);
    }
    for (const auto& n : m.order)
      if (!given.count(n))
        fail(ErrorKind::OrderMismatch, "the given order does not mention " + n);
  } else {
    global = detail::default_order(m);
  }

  // Domain sizes come from the bindings of the variables that occur.
  std::map<std::string, int> sizes;
  {
    std::function<void(const ContractionExpr&)> walk = [&](const ContractionExpr& n) {
      if (n.kind == ExprKind::Var) {
        auto it = b.find(n.var);
        if (it == b.end()) fail(ErrorKind::UnboundVariable, "unbound variable " + n.var);
        const TensorBinding& tb = it->second;
        if (tb.indices.size() != tb.dims.size())
          fail(ErrorKind::RankMismatch, n.var + ": binding arity differs from tensor rank");
        for (std::size_t k = 0; k < tb.indices.size(); ++k) {
          auto [pos, fresh] = std::pair{sizes.find(tb.indices[k]), false};
          if (pos == sizes.end()) {
            sizes.emplace(tb.indices[k], tb.dims[k]);
            fresh = true;
          } else if (pos->second != tb.dims[k]) {
            fail(ErrorKind::ShapeMismatch,
                 "index " + tb.indices[k] + " has two different domain sizes");
          }
          (void)fresh;
        }
      }
      if (n.lhs) walk(*n.lhs);
      if (n.rhs) walk(*n.rhs);
    };
    walk(e);
  }

  SortedExpr out;
  for (const auto& n : global) {
    auto it = sizes.find(n);
    out.universe.add(n, it == sizes.end() ? 0 : it->second);
  }
  out.root = detail::sort_walk(e, b, out.universe);
  return out;
}

/// Renders a tree back to expression syntax; Rep prints as rep(i, e).
inline std::string to_text(const ContractionExpr& e) {
  auto paren = [](ExprKind outer, ExprKind inner, const std::string& s) {
    bool need = outer == ExprKind::Mul && inner == ExprKind::Add;
    return need ? "(" + s + ")" : s;
  };
  switch (e.kind) {
    case ExprKind::Var: {
      std::string s = e.var + "(";
      for (std::size_t k = 0; k < e.indices.size(); ++k) {
        if (k) s += ",";
        s += e.indices[k];
      }
      return s + ")";
    }
    case ExprKind::Sum:
      return "sum(" + e.binder + ", " + to_text(*e.lhs) + ")";
    case ExprKind::Rep:
      return "rep(" + e.binder + ", " + to_text(*e.lhs) + ")";
    case ExprKind::Mul:
      return paren(ExprKind::Mul, e.lhs->kind, to_text(*e.lhs)) + " * " +
             paren(ExprKind::Mul, e.rhs->kind, to_text(*e.rhs));
    case ExprKind::Add:
      return to_text(*e.lhs) + " + " + to_text(*e.rhs);
  }
  return "";
}

// ---------------------------------------------------------------------------
// Interpretation as nested streams.

template <typename R>
using ValueSource = std::function<Value<R>()>;  // fresh cursor per call

namespace detail {

inline int position_in(const std::vector<int>& shape, int id) {
  auto it = std::lower_bound(shape.begin(), shape.end(), id);
  return static_cast<int>(it - shape.begin());
}

}  // namespace detail

/// Folds a sorted tree into stream combinators: Var taps its source, Mul
/// merges by intersection (skipping when both sides can search), Add by
/// union, Sum contracts its level, Rep inserts a constant level. The result
/// is a scalar when the free shape is empty, a nested stream otherwise.
template <class S>
Value<typename S::value_type> interpret(
    const ContractionExpr& e, const IndexUniverse& u,
    const std::map<std::string, ValueSource<typename S::value_type>>& sources,
    const std::shared_ptr<Budget>& budget) {
  using R = typename S::value_type;
  switch (e.kind) {
    case ExprKind::Var: {
      auto it = sources.find(e.var);
      if (it == sources.end())
        fail(ErrorKind::UnboundVariable, "no tensor bound to " + e.var);
      return it->second();
    }
    case ExprKind::Mul: {
      Value<R> a = interpret<S>(*e.lhs, u, sources, budget);
      Value<R> b = interpret<S>(*e.rhs, u, sources, budget);
      if (a.is_scalar() != b.is_scalar())
        fail(ErrorKind::ShapeMismatch, "product of values at different depths");
      if (a.is_scalar()) return Value<R>(S::mul(a.scalar(), b.scalar()));
      bool skipping = a.stream().searchable() && b.stream().searchable();
      return value_mul<S>(std::move(a), std::move(b), skipping);
    }
    case ExprKind::Add: {
      Value<R> a = interpret<S>(*e.lhs, u, sources, budget);
      Value<R> b = interpret<S>(*e.rhs, u, sources, budget);
      return value_add<S>(std::move(a), std::move(b));
    }
    case ExprKind::Sum: {
      Value<R> body = interpret<S>(*e.lhs, u, sources, budget);
      const auto& bshape = e.lhs->shape;
      int d = detail::position_in(bshape, e.binder_id);
      bool scalar_inner = d + 1 == static_cast<int>(bshape.size());
      if (body.is_scalar()) fail(ErrorKind::PrefixMismatch, "sum over a scalar");
      if (d == 0) return contract<S>(body.take_stream(), scalar_inner, budget);
      auto bud = budget;
      return map_at<R>(body.take_stream(), d, [bud, scalar_inner](Value<R> v) {
        if (v.is_scalar()) fail(ErrorKind::PrefixMismatch, "sum level missing");
        return contract<S>(v.take_stream(), scalar_inner, bud);
      });
    }
    case ExprKind::Rep: {
      Value<R> body = interpret<S>(*e.lhs, u, sources, budget);
      int d = detail::position_in(e.shape, e.binder_id);
      Index dim = u.size_of(e.binder_id);
      if (d == 0) return Value<R>(replicate<R>(dim, std::move(body)));
      return map_at<R>(body.take_stream(), d, [dim](Value<R> v) {
        return Value<R>(replicate<R>(dim, std::move(v)));
      });
    }
  }
  fail(ErrorKind::RuntimeFault, "unreachable expression kind");
}

/// Free indices of a sorted tree, ascending ids.
inline const std::vector<int>& free_indices(const SortedExpr& s) { return s.root->shape; }

// ---------------------------------------------------------------------------
// Interpretation in the variable algebra. Same fold, dense semantics; this is
// the slow reference the stream path is compared against.

template <class S>
SparseVariable<typename S::value_type> interpret_variables(
    const ContractionExpr& e, const IndexUniverse& u,
    const std::map<std::string, SparseVariable<typename S::value_type>>& vars) {
  using R = typename S::value_type;
  switch (e.kind) {
    case ExprKind::Var: {
      auto it = vars.find(e.var);
      if (it == vars.end())
        fail(ErrorKind::UnboundVariable, "no variable bound to " + e.var);
      SparseVariable<R> v = it->second;
      v.shape = e.shape;
      return v.template normalized<S>();
    }
    case ExprKind::Mul:
      return var_mul<S>(interpret_variables<S>(*e.lhs, u, vars),
                        interpret_variables<S>(*e.rhs, u, vars));
    case ExprKind::Add:
      return var_add<S>(interpret_variables<S>(*e.lhs, u, vars),
                        interpret_variables<S>(*e.rhs, u, vars));
    case ExprKind::Sum:
      return var_sum<S>(e.binder_id, interpret_variables<S>(*e.lhs, u, vars));
    case ExprKind::Rep:
      return var_rep<S>(e.binder_id, interpret_variables<S>(*e.lhs, u, vars), u);
  }
  fail(ErrorKind::RuntimeFault, "unreachable expression kind");
}

}  // namespace etch
