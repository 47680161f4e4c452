#include <iostream>

#include "uscc/cli.hpp"

int main(int argc, char** argv) {
  return uscc::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
