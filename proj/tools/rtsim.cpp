#include "rtsim/cli/dispatch.hpp"

int main(int argc, char** argv) { return rtsim::cli::run_cli(argc, argv); }
