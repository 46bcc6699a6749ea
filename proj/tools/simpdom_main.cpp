#include <iostream>

#include "simpdom/cli.hpp"

int main(int argc, char** argv) {
  return simpdom::run_cli(argc, argv, std::cout, std::cerr);
}
