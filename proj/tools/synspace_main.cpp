#include <iostream>
#include <string>
#include <vector>

#include "synspace/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return synspace::run_cli(args, std::cout, std::cerr);
}
