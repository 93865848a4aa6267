#include "marcast/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return marcast::cli::run(argc, argv, std::cout, std::cerr); }
