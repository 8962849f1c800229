#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return covrecon::cli::run(args, std::cout, std::cerr);
}
