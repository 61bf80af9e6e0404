#include <iostream>

#include "neuropt/cli/cli.hpp"

int main(int argc, char** argv) {
  return neuropt::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
