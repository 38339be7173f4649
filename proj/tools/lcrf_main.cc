#include <iostream>
#include <string>
#include <vector>

#include "lcrf/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return lcrf::run_cli(args, std::cout, std::cerr);
}
