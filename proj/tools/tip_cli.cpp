#include <iostream>

#include "tip/cli.hpp"

int main(int argc, char** argv) { return tip::cli::run(argc, argv, std::cout, std::cerr); }
