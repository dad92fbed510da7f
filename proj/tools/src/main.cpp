#include "cli.hpp"

int main(int argc, char** argv) { return tactsim::cli::run_cli(argc, argv); }
