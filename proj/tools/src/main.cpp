#include <iostream>

#include "sparsecert_cli/cli.hpp"

int main(int argc, char** argv) {
  return sparsecert::cli::main_entry(argc, argv, std::cout, std::cerr);
}
