#include <iostream>
#include <string>
#include <vector>

#include "cli_app.hpp"

int main(int argc, char** argv) {
  return cablerender::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
