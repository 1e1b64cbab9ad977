#include <iostream>

#include "ctepa/cli.hpp"

int main(int argc, char** argv) { return ctepa::cli::run(argc, argv, std::cout, std::cerr); }
