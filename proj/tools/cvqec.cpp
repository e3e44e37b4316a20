#include <iostream>
#include <string>
#include <vector>

#include "cvqec/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cvqec::cli::run(args, std::cout, std::cerr);
}
