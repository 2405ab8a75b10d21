#include <iostream>

#include "mtb/cli.hpp"

int main(int argc, char** argv) { return mtb::cli::main(argc, argv, std::cout, std::cerr); }
