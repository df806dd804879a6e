#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "casetwin/cli.hpp"

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("casetwin"));
  std::vector<std::string> args(argv + 1, argv + argc);
  return casetwin::run_cli(args, std::cout, std::cerr);
}
