#include "cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return fastmaxwell::cli::run_cli(args, std::cout, std::cerr);
}
