#include <iostream>

#include "tsim/cli.hpp"

int main(int argc, char** argv) { return tsim::cli_main(argc, argv, std::cout, std::cerr); }
