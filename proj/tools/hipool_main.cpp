#include <iostream>
#include <string>
#include <vector>

#include "hipool/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return hipool::cli::run(args, std::cout, std::cerr);
}
