#include <iostream>

#include "wseq/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  std::vector<std::string> args(argv + 1, argv + argc);
  return wseq::cli::run_cli(std::move(args), std::cout, std::cerr);
}
