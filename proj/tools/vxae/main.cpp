#include <iostream>

#include "vxae/cli.hpp"

int main(int argc, char** argv) {
  return vxae::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
