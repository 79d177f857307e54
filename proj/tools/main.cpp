#include "fluidnet/cli.hpp"

int main(int argc, char** argv) { return fluidnet::run_cli(argc, argv); }
