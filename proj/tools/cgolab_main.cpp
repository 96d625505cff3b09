#include <string>
#include <vector>

#include "cgolab/cli_runner.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cgolab::cli_run(args);
}
