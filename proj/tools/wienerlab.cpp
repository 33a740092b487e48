#include "wienerlab/cli.hpp"

int main(int argc, char** argv) { return wienerlab::cli_main(argc, argv); }
