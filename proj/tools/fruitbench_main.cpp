#include <iostream>

#include "fruitbench/cli.hpp"

int main(int argc, char** argv) {
  return fruitbench::run_cli(argc, argv, std::cout, std::cerr);
}
