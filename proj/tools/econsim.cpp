#include <iostream>

#include "econsim/cli.hpp"

int main(int argc, char** argv) { return econsim::cli::run(argc, argv, std::cout, std::cerr); }
