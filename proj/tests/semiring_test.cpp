#include <catch2/catch_amalgamated.hpp>

#include "etch/semiring.hpp"
#include "support/gen.hpp"

using namespace etch;

namespace {

template <class S>
std::vector<typename S::value_type> samples(std::uint64_t seed, int n) {
  test::Rng rng(seed);
  std::vector<typename S::value_type> out;
  out.push_back(S::zero());
  out.push_back(S::one());
  for (int k = 0; k < n; ++k) out.push_back(test::Sample<S>::value(rng));
  return out;
}

}  // namespace

TEST_CASE("arithmetic laws hold on sampled triples") {
  auto rep = check_axioms<Arithmetic>(samples<Arithmetic>(1, 12));
  CAPTURE(rep.violations);
  CHECK(rep.ok());
  CHECK(rep.triples_checked > 1000);
}

TEST_CASE("integer laws hold on sampled triples") {
  auto rep = check_axioms<Integer>(samples<Integer>(2, 12));
  CAPTURE(rep.violations);
  CHECK(rep.ok());
}

TEST_CASE("boolean laws hold on sampled triples") {
  auto rep = check_axioms<Boolean>(samples<Boolean>(3, 12));
  CAPTURE(rep.violations);
  CHECK(rep.ok());
}

TEST_CASE("min-plus laws hold on sampled triples") {
  auto rep = check_axioms<MinPlus<std::int64_t>>(samples<MinPlus<std::int64_t>>(4, 12));
  CAPTURE(rep.violations);
  CHECK(rep.ok());
  auto repd = check_axioms<MinPlus<double>>(samples<MinPlus<double>>(5, 12));
  CAPTURE(repd.violations);
  CHECK(repd.ok());
}

TEST_CASE("min-plus identities") {
  using T = MinPlus<std::int64_t>;
  auto inf = T::zero();
  CHECK(inf.inf);
  CHECK(T::eq(T::add(inf, T::one()), T::one()));          // min(inf, 0) = 0
  CHECK(T::eq(T::mul(inf, T::one()), inf));               // inf + 0 = inf
  auto three = MinPlusValue<std::int64_t>::finite(3);
  auto five = MinPlusValue<std::int64_t>::finite(5);
  CHECK(T::eq(T::add(three, five), three));               // min
  CHECK(T::eq(T::mul(three, five), MinPlusValue<std::int64_t>::finite(8)));  // plus
}

TEST_CASE("a broken candidate is rejected") {
  struct Subtraction {
    using value_type = int;
    static int zero() { return 0; }
    static int one() { return 1; }
    static int add(int a, int b) { return a - b; }  // not commutative, wrong identity
    static int mul(int a, int b) { return a * b; }
    static bool eq(int a, int b) { return a == b; }
  };
  auto rep = check_axioms<Subtraction>({0, 1, 2, 5});
  CHECK_FALSE(rep.ok());
}

TEST_CASE("textual round trips") {
  CHECK(Integer::to_text(-7) == "-7");
  CHECK(Integer::from_real(3.0) == 3);
  CHECK(Boolean::to_text(true) == "1");
  CHECK(Boolean::from_real(2.5));
  CHECK(Arithmetic::to_text(0.5) == "0.5");
  using T = MinPlus<double>;
  CHECK(T::to_text(T::zero()) == "inf");
  CHECK(T::from_real(std::numeric_limits<double>::infinity()).inf);
  CHECK(T::to_text(T::from_real(2.0)) == "2");
}
