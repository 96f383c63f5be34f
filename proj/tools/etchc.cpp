#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etch/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"etchc: evaluate and compile sparse index expressions"};
  app.require_subcommand(1);

  etch::RunConfig cfg;
  std::string order_text;

  CLI::App* eval = app.add_subcommand("eval", "evaluate an expression over bound tensors");
  eval->add_option("--expr", cfg.expr_text, "expression, e.g. \"sum(j, A(i,j) * B(j,k))\"");
  eval->add_option("--preset", cfg.preset,
                   "named kernel: mmul1 mmul2 ttv ttm mttkrp inner3 (overrides --expr)");
  eval->add_option("--bind", cfg.bind_specs,
                   "tensor binding name=path:format:indexlist, e.g. A=a.mtx:dcsr:i,j")
      ->take_all();
  eval->add_option("--semiring", cfg.semiring, "f64 | int | bool | minplus")
      ->capture_default_str();
  eval->add_option("--order", order_text, "comma-separated index order override");
  eval->add_option("--backend", cfg.backend, "interpret | prog | emit-c")
      ->capture_default_str();
  eval->add_option("-o,--out", cfg.out_path, "output path (.tns result or .c source)");
  eval->add_flag("--metrics", cfg.metrics, "report size and operation counts on stderr");
  eval->add_option("--budget", cfg.budget, "state transition budget")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (!order_text.empty())
    for (const auto& name : etch::detail::split(order_text, ','))
      cfg.order.push_back(name);

  return etch::run(cfg);
}
