#include "fsi/cli.hpp"

int main(int argc, char** argv) { return fsi::run_cli(argc, argv); }
