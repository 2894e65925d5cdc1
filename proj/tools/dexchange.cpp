#include <iostream>

#include "dex/cli.hpp"

int main(int argc, char** argv) {
  return dex::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
