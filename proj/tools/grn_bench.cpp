#include "grn/cli.hpp"

int main(int argc, char** argv) { return grn::cli_main(argc, argv); }
