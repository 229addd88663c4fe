#include <iostream>
#include <string>
#include <vector>

#include "disco/experiment.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    auto opts = disco::parse_experiment_args(args, std::cout);
    if (!opts) return 0;
    disco::run_experiment(*opts, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "disco: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
