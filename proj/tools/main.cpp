#include <iostream>

#include "cfdim/cli.hpp"

int main(int argc, char** argv) { return cfdim::cli::run(argc, argv, std::cout, std::cerr); }
