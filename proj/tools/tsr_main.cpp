#include "tsr/cli.hpp"

int main(int argc, char** argv) { return tsr::run_cli(argc, argv); }
