#include <iostream>

#include "heatgraph/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return heatgraph::cli::run(args, std::cout, std::cerr);
}
