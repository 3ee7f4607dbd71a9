#include <string>
#include <vector>

#include "margins/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return margins::run_cli(args);
}
