#include <iostream>

#include "toxic/cli.hpp"

int main(int argc, char** argv) {
  return toxic::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
