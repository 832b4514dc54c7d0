#include "mtorl/cli/commands.hpp"

int main(int argc, char** argv) { return mtorl::cli::run_cli(argc, argv); }
