#pragma once

#include <iostream>

namespace pdclf {

inline int cli_main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::cerr << "pdclf: no subcommands wired up yet\n";
  return 1;
}

}  // namespace pdclf
