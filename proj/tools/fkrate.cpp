#include <iostream>

#include "finitekey/cli.hpp"

int main(int argc, char** argv) {
  return finitekey::cli_main(argc, argv, std::cout, std::cerr);
}
