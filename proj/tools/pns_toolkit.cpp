#include <iostream>
#include <string>
#include <vector>

#include "pnskit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return pnskit::cli::run(args, std::cout, std::cerr);
}
