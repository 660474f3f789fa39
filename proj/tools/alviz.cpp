#include "alviz/cli.hpp"

int main(int argc, char** argv) { return alviz::cli::main(argc, argv); }
