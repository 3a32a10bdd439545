#include <iostream>
#include <string>
#include <vector>

#include "nestquant_tools/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nestquant::cli::run(args, std::cout, std::cerr);
}
