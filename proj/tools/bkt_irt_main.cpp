#include <iostream>
#include <string>
#include <vector>

#include "bkt_irt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bkt_irt::cli::dispatch(args, std::cout, std::cerr);
}
