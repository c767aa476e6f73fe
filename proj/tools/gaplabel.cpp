#include "gaplabel/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return gaplabel::run_cli(argc, argv, std::cout, std::cerr); }
