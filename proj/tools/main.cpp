#include <iostream>

#include "latmove/cli.hpp"

int main(int argc, char** argv) { return latmove::run_cli(argc, argv, std::cout, std::cerr); }
