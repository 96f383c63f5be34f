// One shortest-path relaxation over (min,+): the same contraction that sums
// products over the integers relaxes distances when the semiring swaps.

#include <cstdio>
#include <map>
#include <memory>

#include "etch/expr.hpp"
#include "etch/formats.hpp"
#include "etch/semiring.hpp"
#include "etch/stream.hpp"

using namespace etch;
using T = MinPlus<double>;
using R = T::value_type;

namespace {

ValueSource<R> source_of(EntryList<R> entries, std::vector<Index> dims) {
  auto t = std::make_shared<const CompressedTensor<R>>(
      build_compressed<T>(std::move(entries), std::move(dims)));
  return [t] { return Value<R>(stream_of_compressed<R>(t)); };
}

}  // namespace

int main() {
  // d holds tentative distances from vertex 0; w the edge weights.
  Bindings binds;
  binds["d"] = {{"i"}, {5}};
  binds["w"] = {{"i", "j"}, {5, 5}};
  auto sorted = infer_sorts(*parse("sum(i, d(i) * w(i,j))"), binds);

  std::map<std::string, ValueSource<R>> sources;
  sources["d"] = source_of({{{0}, T::from_real(0)}, {{2}, T::from_real(4)}}, {5});
  sources["w"] = source_of({{{0, 1}, T::from_real(7)},
                            {{0, 2}, T::from_real(4)},
                            {{2, 1}, T::from_real(1)},
                            {{2, 3}, T::from_real(2)},
                            {{3, 4}, T::from_real(5)}},
                           {5, 5});

  auto budget = std::make_shared<Budget>();
  auto value = interpret<T>(*sorted.root, sorted.universe, sources, budget);
  Budget walk;
  auto next = eval_nested<T>(value.stream(), walk, sorted.root->shape);

  for (const auto& [coord, dist] : next.entries)
    std::printf("vertex %d reachable at distance %s\n", coord[0],
                T::to_text(dist).c_str());
  return 0;
}
