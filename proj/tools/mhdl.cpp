#include "mhdl/cli.hpp"

int main(int argc, char** argv) { return mhdl::run_cli(argc, argv); }
