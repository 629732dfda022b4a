#include <iostream>

#include "clustgeo_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return clustgeo::cli::run(args, std::cout, std::cerr);
}
