#include <iostream>
#include <string>
#include <vector>

#include "edgepool_cli/commands.hpp"

int main(int argc, char** argv) {
  return edgepool::cli::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
