#include <string>
#include <vector>

#include "epag/cli.hpp"

int main(int argc, char** argv) {
  return epag::cli::cli_dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
