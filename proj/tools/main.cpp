#include <iostream>
#include <string>
#include <vector>

#include "gctune/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gctune::run_cli(args, std::cout, std::cerr);
}
