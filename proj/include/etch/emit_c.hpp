#pragma once
#include <set>

#include <string>

#include "etch/ir.hpp"
#include "etch/semiring.hpp"

// Renders a lowered kernel as one self-contained C99 translation unit.
// Output is deterministic: identical kernels produce identical bytes.

namespace etch::ir {

struct CTraits {
  std::string value_type;
  std::string includes;   // extra #include lines, may be empty
  std::string zero;
  std::string add_open;   // add(a,b) prints as add_open a add_mid b add_close
  std::string add_mid;
  std::string add_close;
  std::string mul_open;
  std::string mul_mid;
  std::string mul_close;
};

template <class S>
CTraits c_traits();

template <>
inline CTraits c_traits<Arithmetic>() {
  return {"double", "", "0.0", "(", " + ", ")", "(", " * ", ")"};
}

template <>
inline CTraits c_traits<Integer>() {
  return {"int64_t", "#include <stdint.h>\n", "0", "(", " + ", ")", "(", " * ", ")"};
}

template <>
inline CTraits c_traits<Boolean>() {
  return {"unsigned char", "", "0", "(", " || ", ")", "(", " && ", ")"};
}

template <>
inline CTraits c_traits<MinPlus<double>>() {
  return {"double", "#include <math.h>\n", "INFINITY", "fmin(", ", ", ")", "(", " + ", ")"};
}

namespace detail {

inline void pexpr(const Expr& e, const CTraits& tr, std::string& o) {
  auto bin = [&](const char* op) {
    o += '(';
    pexpr(*e.a, tr, o);
    o += op;
    pexpr(*e.b, tr, o);
    o += ')';
  };
  switch (e.kind) {
    case Expr::IntLit: o += std::to_string(e.ival); return;
    case Expr::BoolLit: o += e.bval ? '1' : '0'; return;
    case Expr::VarInt: o += e.name; return;
    case Expr::ReadInt:
    case Expr::ReadVal:
      o += e.name;
      o += '[';
      pexpr(*e.a, tr, o);
      o += ']';
      return;
    case Expr::IAdd: bin(" + "); return;
    case Expr::IMul: bin(" * "); return;
    case Expr::Min:
    case Expr::Max: {
      std::string a, b;
      pexpr(*e.a, tr, a);
      pexpr(*e.b, tr, b);
      const char* cmp = e.kind == Expr::Min ? " < " : " > ";
      o += "(" + a + cmp + b + " ? " + a + " : " + b + ")";
      return;
    }
    case Expr::Lt: bin(" < "); return;
    case Expr::Le: bin(" <= "); return;
    case Expr::Eq: bin(" == "); return;
    case Expr::And: bin(" && "); return;
    case Expr::Or: bin(" || "); return;
    case Expr::Not:
      o += "(!";
      pexpr(*e.a, tr, o);
      o += ')';
      return;
    case Expr::VAdd: {
      std::string a, b;
      pexpr(*e.a, tr, a);
      pexpr(*e.b, tr, b);
      o += tr.add_open + a + tr.add_mid + b + tr.add_close;
      return;
    }
    case Expr::VMul: {
      std::string a, b;
      pexpr(*e.a, tr, a);
      pexpr(*e.b, tr, b);
      o += tr.mul_open + a + tr.mul_mid + b + tr.mul_close;
      return;
    }
    case Expr::VZero: o += tr.zero; return;
  }
}

inline std::string pexpr(const ExprP& e, const CTraits& tr) {
  std::string o;
  pexpr(*e, tr, o);
  return o;
}

inline void pstmt(const Stmt& s, const CTraits& tr, int ind, std::string& o) {
  auto line = [&](const std::string& t) {
    o.append(static_cast<std::size_t>(ind) * 2, ' ');
    o += t;
    o += '\n';
  };
  switch (s.kind) {
    case Stmt::Skip: return;
    case Stmt::DeclInt: line("int " + s.name + " = " + pexpr(s.e, tr) + ";"); return;
    case Stmt::Assign: line(s.name + " = " + pexpr(s.e, tr) + ";"); return;
    case Stmt::Seq:
      pstmt(*s.s1, tr, ind, o);
      pstmt(*s.s2, tr, ind, o);
      return;
    case Stmt::If:
      line("if (" + pexpr(s.e, tr) + ") {");
      pstmt(*s.s1, tr, ind + 1, o);
      line("} else {");
      pstmt(*s.s2, tr, ind + 1, o);
      line("}");
      return;
    case Stmt::If1:
      line("if (" + pexpr(s.e, tr) + ") {");
      pstmt(*s.s1, tr, ind + 1, o);
      line("}");
      return;
    case Stmt::While:
      line("while (" + pexpr(s.e, tr) + ") {");
      pstmt(*s.s1, tr, ind + 1, o);
      line("}");
      return;
    case Stmt::StoreOut: {
      std::string at = pexpr(s.out_at, tr);
      std::string cell = "out[" + at + "]";
      line(cell + " = " + tr.add_open + cell + tr.add_mid + pexpr(s.out_add, tr) +
           tr.add_close + ";");
      return;
    }
  }
}

inline void collect_vars(const Expr& e, std::set<std::string>& names) {
  if (e.kind == Expr::VarInt) names.insert(e.name);
  if (e.a) collect_vars(*e.a, names);
  if (e.b) collect_vars(*e.b, names);
}

inline void collect_vars(const Stmt& s, std::set<std::string>& names) {
  if (s.e) collect_vars(*s.e, names);
  if (s.out_at) collect_vars(*s.out_at, names);
  if (s.out_add) collect_vars(*s.out_add, names);
  if (s.s1) collect_vars(*s.s1, names);
  if (s.s2) collect_vars(*s.s2, names);
}

}  // namespace detail

inline std::string emit_c(const Kernel& k, const CTraits& tr) {
  std::string o = "/*\n";
  o += k.header;
  o += " * out is row-major over (";
  for (std::size_t i = 0; i < k.out_dims.size(); ++i)
    o += (i ? ", " : "") + k.out_dims[i].substr(2);
  o += "); the caller must fill it with " + tr.zero + " beforehand.\n */\n";
  if (!tr.includes.empty()) o += tr.includes;
  o += "\nvoid " + k.name + "(";
  bool first = true;
  auto param = [&](const std::string& t) {
    if (!first) o += ", ";
    first = false;
    o += t;
  };
  for (const auto& t : k.tensors) {
    if (!t.format.dense)
      for (int l = 0; l < t.format.rank; ++l) {
        param("const int* " + t.name + "_pos" + std::to_string(l));
        param("const int* " + t.name + "_crd" + std::to_string(l));
      }
    param("const " + tr.value_type + "* " + t.name + "_vals");
  }
  for (const auto& d : k.dim_names) param("int " + d);
  param(tr.value_type + "* out");
  o += ") {\n";
  std::set<std::string> used;
  detail::collect_vars(*k.body, used);
  for (const auto& d : k.dim_names)
    if (!used.count(d)) o += "  (void) " + d + ";\n";
  detail::pstmt(*k.body, tr, 1, o);
  o += "}\n";
  return o;
}

template <class S>
std::string emit_c(const Kernel& k) {
  return emit_c(k, c_traits<S>());
}

}  // namespace etch::ir
