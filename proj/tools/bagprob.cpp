#include <iostream>
#include <string>
#include <vector>

#include "bagprob/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bagprob::cli::run(args, std::cout, std::cerr);
}
