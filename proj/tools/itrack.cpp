#include "itrack/cli.hpp"

int main(int argc, char** argv) { return itrack::cli::main(argc, argv); }
