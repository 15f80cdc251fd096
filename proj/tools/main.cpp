#include <iostream>

#include "corpusplay/cli.hpp"

int main(int argc, char** argv) { return corpusplay::cli::main(argc, argv, std::cout, std::cerr); }
