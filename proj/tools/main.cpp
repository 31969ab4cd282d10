#include "dqpgo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return dqpgo::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
