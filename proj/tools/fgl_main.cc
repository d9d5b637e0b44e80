#include <iostream>
#include <string>
#include <vector>

#include "fgl/cli/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fgl::RunCli(args, std::cout, std::cerr);
}
