#include <iostream>
#include <string>
#include <vector>

#include "crowdnav_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return crowdnav::app::run_cli(args, std::cout, std::cerr);
}
