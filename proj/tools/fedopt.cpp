#include "fedopt/cli.hpp"

int main(int argc, char** argv) { return fedopt::run_command(argc, argv); }
