#include <iostream>
#include <string>
#include <vector>

#include "nestedcuts_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return nestedcuts::cli::run(args, std::cout, std::cerr);
}
