#include "thermosig/cli.hpp"

int main(int argc, char** argv) { return thermosig::cli_main(argc, argv); }
