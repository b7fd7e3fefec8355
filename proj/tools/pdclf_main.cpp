// Command-line front end; subcommands are wired up in cli.hpp.
#include "pdclf/cli.hpp"

int main(int argc, char** argv) { return pdclf::cli_main(argc, argv); }
