#include "pvtrack/cli.hpp"

int main(int argc, char** argv) { return pvtrack::cli::main(argc, argv); }
