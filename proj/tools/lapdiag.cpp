#include "lapdiag/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lapdiag::run_cli(argc, argv, std::cout, std::cerr); }
