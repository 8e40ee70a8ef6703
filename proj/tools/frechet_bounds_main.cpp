#include <iostream>
#include <string>
#include <vector>

#include "frechet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return frechet::run_cli(args, std::cout, std::cerr);
}
