#include "exitctl/cli.hpp"

int main(int argc, char** argv) { return exitctl::run_cli(argc, argv); }
