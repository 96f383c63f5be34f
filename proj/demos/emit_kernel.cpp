// Lower a contraction to C source and print it. The emitted kernel walks the
// compressed operands with fused cursors; no temporaries, no allocations.

#include <iostream>

#include "etch/emit_c.hpp"
#include "etch/expr.hpp"
#include "etch/ir.hpp"
#include "etch/semiring.hpp"

using namespace etch;

int main() {
  Bindings binds;
  binds["C"] = {{"i", "j", "k"}, {64, 64, 64}};
  binds["v"] = {{"k"}, {64}};
  auto sorted = infer_sorts(*parse("sum(k, C(i,j,k) * v(k))"), binds);

  std::map<std::string, ir::FormatInfo> formats{{"C", {false, 3}}, {"v", {false, 1}}};
  auto kernel = ir::lower(sorted, formats, "ttv");
  std::cout << emit_c<Arithmetic>(kernel);
  return 0;
}
