#include <vector>

#include "calderon/cli.hpp"

int main(int argc, char** argv) {
  return calderon::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
