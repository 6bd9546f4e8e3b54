#include "bivirus/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return bivirus::cli::run(argc, argv, std::cout, std::cerr); }
