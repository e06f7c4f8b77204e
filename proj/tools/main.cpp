#include <iostream>

#include "scoregraph/cli.hpp"

int main(int argc, char** argv) { return scoregraph::run_cli(argc, argv, std::cout, std::cerr); }
