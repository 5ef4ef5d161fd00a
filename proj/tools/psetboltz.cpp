#include <iostream>
#include <string>
#include <vector>

#include "psetboltz_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return psetboltz::run_app(args, std::cout, std::cerr);
}
