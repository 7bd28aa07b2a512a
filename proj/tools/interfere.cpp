#include <iostream>

#include "interfere/cli.hpp"

int main(int argc, char** argv) { return interfere::cli::run(argc, argv, std::cout, std::cerr); }
