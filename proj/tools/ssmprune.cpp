#include <iostream>

#include "ssmprune/cli.hpp"

int main(int argc, char** argv) {
  return ssmprune::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
