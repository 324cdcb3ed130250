#include <iostream>
#include <string>
#include <vector>

#include "fscp/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fscp::run_cli(args, std::cout, std::cerr);
}
