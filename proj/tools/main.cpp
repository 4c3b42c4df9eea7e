#include <iostream>

#include "larf/cli.hpp"

int main(int argc, char** argv) {
  return larf::run_cli(argc, argv, std::cin, std::cout, std::cerr);
}
