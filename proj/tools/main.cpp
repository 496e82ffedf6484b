#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return strata::run_cli(argc, argv, std::cout, std::cerr); }
