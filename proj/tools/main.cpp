#include "subdiv/cli.hpp"

int main(int argc, char** argv) { return subdiv::cli_main(argc, argv); }
