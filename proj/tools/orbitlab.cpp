#include "orbitlab/cli.hpp"

int main(int argc, char** argv) { return orbitlab::cli::main(argc, argv); }
