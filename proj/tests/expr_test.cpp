#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "etch/combinators.hpp"
#include "etch/expr.hpp"
#include "etch/formats.hpp"
#include "etch/oracle.hpp"
#include "etch/semiring.hpp"
#include "support/eq.hpp"
#include "support/gen.hpp"

using namespace etch;
using etch::test::Rng;

namespace {

Bindings matmul_bindings() {
  Bindings b;
  b["A"] = {{"i", "j"}, {2, 2}};
  b["B"] = {{"j", "k"}, {2, 2}};
  return b;
}

auto kind_is = [](ErrorKind k) {
  return Catch::Matchers::Predicate<Error>(
      [k](const Error& e) { return e.kind() == k; });
};

std::vector<std::string> order_names(const SortedExpr& s) {
  return s.universe.names;
}

}  // namespace

TEST_CASE("parser round trips the surface syntax") {
  auto rt = [](const std::string& text) { return to_text(*parse(text)); };
  CHECK(rt("A(i,j)") == "A(i,j)");
  CHECK(rt("sum(j, A(i,j) * B(j,k))") == "sum(j, A(i,j) * B(j,k))");
  CHECK(rt("sum(j,A( i , j )*B(j,k))") == "sum(j, A(i,j) * B(j,k))");
  CHECK(rt("A(i) + B(i) * C(i)") == "A(i) + B(i) * C(i)");
  CHECK(rt("(A(i) + B(i)) * C(i)") == "(A(i) + B(i)) * C(i)");
  CHECK(rt("sum(i, sum(j, A(i,j)))") == "sum(i, sum(j, A(i,j)))");

  SECTION("printing is a fixpoint") {
    for (const std::string text :
         {"sum(j, A(i,j) * B(j,k))", "(A(i) + B(i)) * C(i)", "A(i) + B(i) * C(i)"}) {
      auto once = to_text(*parse(text));
      CHECK(to_text(*parse(once)) == once);
    }
  }
  SECTION("star binds tighter than plus") {
    auto e = parse("A(i) + B(i) * C(i)");
    REQUIRE(e->kind == ExprKind::Add);
    CHECK(e->rhs->kind == ExprKind::Mul);
  }
}

TEST_CASE("parser reports where it gave up") {
  auto col_of = [](const std::string& text) -> std::string {
    try {
      parse(text);
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::Syntax);
      return e.what();
    }
    return "(no error)";
  };
  CHECK(col_of("sum(l, A(i,j)").find("column 14") != std::string::npos);
  CHECK(col_of("A(i,j) @") != "(no error)");
  CHECK(col_of("A(i,j) B") != "(no error)");
  CHECK(col_of("sum(, A(i))") != "(no error)");
  CHECK(col_of("A()") != "(no error)");
  CHECK(col_of("") != "(no error)");
  CHECK(col_of("sum(i A(i))") != "(no error)");
}

TEST_CASE("default index order follows first mention within access order") {
  Bindings b;
  b["A"] = {{"i", "j"}, {4, 4}};
  b["B"] = {{"j", "k"}, {4, 4}};
  b["C"] = {{"i", "j", "k"}, {4, 4, 4}};
  b["Cp"] = {{"i", "j", "k"}, {4, 4, 4}};
  b["v"] = {{"k"}, {4}};

  auto names = [&](const std::string& text) {
    auto s = infer_sorts(*parse(text), b);
    return order_names(s);
  };
  CHECK(names("sum(j, A(i,j) * B(j,k))") == std::vector<std::string>{"i", "j", "k"});
  CHECK(names("sum(k, C(i,j,k) * v(k))") == std::vector<std::string>{"i", "j", "k"});
  CHECK(names("sum(i, sum(j, sum(k, C(i,j,k) * Cp(i,j,k))))") ==
        std::vector<std::string>{"i", "j", "k"});

  SECTION("accesses can force an index ahead of its first mention") {
    Bindings b2;
    b2["A"] = {{"i", "k"}, {4, 4}};
    b2["B"] = {{"j", "k"}, {4, 4}};
    auto s = infer_sorts(*parse("sum(k, A(i,k) * B(j,k))"), b2);
    CHECK(order_names(s) == std::vector<std::string>{"i", "j", "k"});
  }
  SECTION("four-index kernels interleave the same way") {
    Bindings b3;
    b3["C"] = {{"i", "j", "l"}, {4, 4, 4}};
    b3["A"] = {{"k", "l"}, {4, 4}};
    auto s = infer_sorts(*parse("sum(l, C(i,j,l) * A(k,l))"), b3);
    CHECK(order_names(s) == std::vector<std::string>{"i", "j", "k", "l"});

    Bindings b4;
    b4["C"] = {{"i", "j", "k"}, {4, 4, 4}};
    b4["A"] = {{"j", "l"}, {4, 4}};
    b4["B"] = {{"k", "l"}, {4, 4}};
    auto s2 = infer_sorts(*parse("sum(j, sum(k, C(i,j,k) * A(j,l) * B(k,l)))"), b4);
    CHECK(order_names(s2) == std::vector<std::string>{"i", "j", "k", "l"});
  }
}

TEST_CASE("sort inference inserts replication around products") {
  auto s = infer_sorts(*parse("sum(j, A(i,j) * B(j,k))"), matmul_bindings());
  REQUIRE(s.root->kind == ExprKind::Sum);
  const auto& mul = *s.root->lhs;
  REQUIRE(mul.kind == ExprKind::Mul);
  // A(i,j) misses k, B(j,k) misses i; both get lifted to {i,j,k}.
  REQUIRE(mul.lhs->kind == ExprKind::Rep);
  CHECK(mul.lhs->binder == "k");
  CHECK(mul.lhs->lhs->var == "A");
  REQUIRE(mul.rhs->kind == ExprKind::Rep);
  CHECK(mul.rhs->binder == "i");
  CHECK(mul.rhs->lhs->var == "B");
  CHECK(mul.shape == std::vector<int>{0, 1, 2});
  CHECK(s.root->shape == std::vector<int>{0, 2});
  CHECK(free_indices(s) == std::vector<int>{0, 2});

  SECTION("sum operands are lifted the same way") {
    Bindings b;
    b["A"] = {{"i"}, {3}};
    b["B"] = {{"i", "j"}, {3, 2}};
    auto s2 = infer_sorts(*parse("A(i) + B(i,j)"), b);
    REQUIRE(s2.root->kind == ExprKind::Add);
    REQUIRE(s2.root->lhs->kind == ExprKind::Rep);
    CHECK(s2.root->lhs->binder == "j");
    CHECK(s2.root->rhs->kind == ExprKind::Var);
  }
  SECTION("a lone variable gets no replication") {
    Bindings b;
    b["A"] = {{"i", "j"}, {2, 2}};
    auto s2 = infer_sorts(*parse("A(i,j)"), b);
    CHECK(s2.root->kind == ExprKind::Var);
    CHECK(s2.root->shape == std::vector<int>{0, 1});
  }
}

TEST_CASE("sort inference rejects ill-formed programs") {
  auto b = matmul_bindings();
  SECTION("unbound variable") {
    CHECK_THROWS_MATCHES(infer_sorts(*parse("sum(j, A(i,j) * X(j,k))"), b), Error,
                         kind_is(ErrorKind::UnboundVariable));
  }
  SECTION("summing an index the body does not carry") {
    CHECK_THROWS_MATCHES(infer_sorts(*parse("sum(l, A(i,j) * B(j,k))"), b), Error,
                         kind_is(ErrorKind::MissingIndex));
  }
  SECTION("summing the same index twice") {
    Bindings b1;
    b1["A"] = {{"i"}, {3}};
    CHECK_THROWS_MATCHES(infer_sorts(*parse("sum(i, sum(i, A(i)))"), b1), Error,
                         kind_is(ErrorKind::MissingIndex));
  }
  SECTION("arity differing from the binding") {
    CHECK_THROWS_MATCHES(infer_sorts(*parse("A(i)"), b), Error,
                         kind_is(ErrorKind::RankMismatch));
  }
  SECTION("access names differing from the binding") {
    CHECK_THROWS_MATCHES(infer_sorts(*parse("A(i,k)"), b), Error,
                         kind_is(ErrorKind::ShapeMismatch));
  }
  SECTION("one index used twice in one access") {
    Bindings b1;
    b1["A"] = {{"i", "i"}, {3, 3}};
    CHECK_THROWS_MATCHES(infer_sorts(*parse("A(i,i)"), b1), Error,
                         kind_is(ErrorKind::DuplicateIndex));
  }
  SECTION("two bindings disagree on a domain size") {
    Bindings b1;
    b1["A"] = {{"i", "j"}, {2, 3}};
    b1["B"] = {{"j", "k"}, {4, 2}};
    CHECK_THROWS_MATCHES(infer_sorts(*parse("sum(j, A(i,j) * B(j,k))"), b1), Error,
                         kind_is(ErrorKind::ShapeMismatch));
  }
  SECTION("accesses that admit no single order") {
    Bindings b1;
    b1["A"] = {{"i", "j"}, {2, 2}};
    b1["B"] = {{"j", "i"}, {2, 2}};
    CHECK_THROWS_MATCHES(infer_sorts(*parse("A(i,j) * B(j,i)"), b1), Error,
                         kind_is(ErrorKind::OrderMismatch));
  }
}

TEST_CASE("an explicit order overrides the default") {
  Bindings b;
  b["A"] = {{"i", "k"}, {2, 2}};
  b["B"] = {{"j", "k"}, {2, 2}};
  auto text = "sum(k, A(i,k) * B(j,k))";

  auto s = infer_sorts(*parse(text), b, {"j", "i", "k"});
  CHECK(order_names(s) == std::vector<std::string>{"j", "i", "k"});
  // Under [j,i,k] the free output is (j,i); ids follow the order positions.
  CHECK(free_indices(s) == std::vector<int>{0, 1});

  SECTION("extra names in the order are ignored") {
    auto s2 = infer_sorts(*parse(text), b, {"i", "j", "k", "z"});
    CHECK(order_names(s2) == std::vector<std::string>{"i", "j", "k"});
  }
  SECTION("an order that omits a mentioned index is rejected") {
    CHECK_THROWS_MATCHES(infer_sorts(*parse(text), b, {"i", "k"}), Error,
                         kind_is(ErrorKind::OrderMismatch));
  }
  SECTION("an order that repeats a name is rejected") {
    CHECK_THROWS_MATCHES(infer_sorts(*parse(text), b, {"i", "i", "j", "k"}), Error,
                         kind_is(ErrorKind::DuplicateIndex));
  }
  SECTION("an order that contradicts an access is rejected") {
    CHECK_THROWS_MATCHES(infer_sorts(*parse(text), b, {"k", "i", "j"}), Error,
                         kind_is(ErrorKind::OrderMismatch));
  }
}

TEST_CASE("sort inference is deterministic and idempotent") {
  auto b = matmul_bindings();
  auto text = "sum(j, A(i,j) * B(j,k))";
  auto s1 = infer_sorts(*parse(text), b);
  auto s2 = infer_sorts(*parse(text), b);
  CHECK(to_text(*s1.root) == to_text(*s2.root));
  CHECK(order_names(s1) == order_names(s2));

  // Feeding the sorted tree back through (with its own order pinned) is a
  // fixpoint: the inserted Rep nodes are kept, no new ones appear.
  auto s3 = infer_sorts(*s1.root, b, order_names(s1));
  CHECK(to_text(*s3.root) == to_text(*s1.root));
  CHECK(order_names(s3) == order_names(s1));
}

namespace {

template <class S>
ValueSource<typename S::value_type> source_of(
    const SparseVariable<typename S::value_type>& v, const IndexUniverse& u) {
  using R = typename S::value_type;
  EntryList<R> entries;
  for (const auto& [c, x] : v.entries) entries.emplace_back(c, x);
  std::vector<Index> dims;
  for (int id : v.shape) dims.push_back(u.size_of(id));
  auto t = std::make_shared<const CompressedTensor<R>>(
      build_compressed<S>(std::move(entries), dims));
  return [t] { return Value<R>(stream_of_compressed<R>(t)); };
}

template <class S>
SparseVariable<typename S::value_type> run_interpret(
    const SortedExpr& s,
    const std::map<std::string, ValueSource<typename S::value_type>>& sources) {
  auto budget = std::make_shared<Budget>();
  auto v = interpret<S>(*s.root, s.universe, sources, budget);
  SparseVariable<typename S::value_type> out;
  out.shape = s.root->shape;
  if (v.is_scalar()) {
    out.template accumulate<S>({}, v.scalar());
    return out.template normalized<S>();
  }
  return eval_nested<S>(v.stream(), *budget, s.root->shape);
}

}  // namespace

TEST_CASE("stream interpretation agrees with the variable interpretation") {
  using S = Integer;
  Rng rng(0xe59);

  SECTION("matrix product on random sparse operands") {
    Bindings b;
    b["A"] = {{"i", "j"}, {8, 8}};
    b["B"] = {{"j", "k"}, {8, 8}};
    auto s = infer_sorts(*parse("sum(j, A(i,j) * B(j,k))"), b);
    for (int round = 0; round < 20; ++round) {
      auto av = etch::test::random_variable<S>(rng, {0, 1}, {8, 8}, 0.3);
      auto bv = etch::test::random_variable<S>(rng, {1, 2}, {8, 8}, 0.3);
      std::map<std::string, ValueSource<int64_t>> sources;
      sources["A"] = source_of<S>(av, s.universe);
      sources["B"] = source_of<S>(bv, s.universe);
      auto via_streams = run_interpret<S>(s, sources);
      auto via_vars = interpret_variables<S>(
          *s.root, s.universe, {{"A", av}, {"B", bv}});
      CAPTURE(round);
      CHECK(etch::test::var_eq<S>(via_streams, via_vars));
      auto brute = contract_reference<S>({{av, bv}, {1}}, s.universe);
      CHECK(etch::test::var_eq<S>(via_streams, brute));
    }
  }
  SECTION("full contraction of an elementwise square is the sum of squares") {
    Bindings b;
    b["C"] = {{"i", "j", "k"}, {4, 4, 4}};
    b["Cp"] = {{"i", "j", "k"}, {4, 4, 4}};
    auto s = infer_sorts(*parse("sum(i, sum(j, sum(k, C(i,j,k) * Cp(i,j,k))))"), b);
    auto cv = etch::test::random_variable<S>(rng, {0, 1, 2}, {4, 4, 4}, 0.4);
    std::map<std::string, ValueSource<int64_t>> sources;
    sources["C"] = source_of<S>(cv, s.universe);
    sources["Cp"] = source_of<S>(cv, s.universe);
    auto got = run_interpret<S>(s, sources);
    int64_t want = 0;
    for (const auto& [c, v] : cv.entries) want += v * v;
    CHECK(got.template at<S>({}) == want);
    CHECK(free_indices(s).empty());
  }
  SECTION("a product against an empty tensor is empty") {
    Bindings b;
    b["A"] = {{"i"}, {6}};
    b["B"] = {{"i"}, {6}};
    auto s = infer_sorts(*parse("A(i) * B(i)"), b);
    SparseVariable<int64_t> av;
    av.shape = {0};
    av.entries = {{{1}, 3}, {{4}, -2}};
    SparseVariable<int64_t> empty;
    empty.shape = {0};
    std::map<std::string, ValueSource<int64_t>> sources;
    sources["A"] = source_of<S>(av, s.universe);
    sources["B"] = source_of<S>(empty, s.universe);
    auto got = run_interpret<S>(s, sources);
    CHECK(got.entries.empty());
  }
}
