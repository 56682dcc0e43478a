#include "hiagg/cli.hpp"

int main(int argc, char **argv) { return hiagg::cli::main(argc, argv); }
