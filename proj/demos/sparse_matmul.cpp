// Sparse matrix product through the expression frontend: bind two entry
// lists, infer the index order, interpret, and print the result as .tns.

#include <iostream>
#include <map>
#include <memory>

#include "etch/expr.hpp"
#include "etch/formats.hpp"
#include "etch/semiring.hpp"
#include "etch/stream.hpp"
#include "etch/tensor_io.hpp"

using namespace etch;

namespace {

ValueSource<int64_t> source_of(EntryList<int64_t> entries, std::vector<Index> dims) {
  auto t = std::make_shared<const CompressedTensor<int64_t>>(
      build_compressed<Integer>(std::move(entries), std::move(dims)));
  return [t] { return Value<int64_t>(stream_of_compressed<int64_t>(t)); };
}

}  // namespace

int main() {
  Bindings binds;
  binds["A"] = {{"i", "j"}, {4, 5}};
  binds["B"] = {{"j", "k"}, {5, 3}};
  auto sorted = infer_sorts(*parse("sum(j, A(i,j) * B(j,k))"), binds);

  std::map<std::string, ValueSource<int64_t>> sources;
  sources["A"] = source_of({{{0, 0}, 2}, {{0, 3}, 1}, {{2, 1}, 5}, {{3, 4}, 7}}, {4, 5});
  sources["B"] = source_of({{{0, 2}, 3}, {{1, 0}, 4}, {{3, 2}, 2}, {{4, 1}, 6}}, {5, 3});

  auto budget = std::make_shared<Budget>();
  auto value = interpret<Integer>(*sorted.root, sorted.universe, sources, budget);

  Budget walk;
  auto result = eval_nested<Integer>(value.stream(), walk, sorted.root->shape);
  write_frostt<Integer>(std::cout, result);

  // The product never touches rows of B that A's columns miss.
  Budget probe;
  auto m = measure(value.stream(), probe);
  std::cerr << "size0: " << m.size0 << " size: " << m.size
            << " advances: " << m.advances << " skips: " << m.skips << "\n";
  return 0;
}
