#include <iostream>

#include "reputex/cli.hpp"

int main(int argc, char** argv) { return reputex::cli::run(argc, argv, std::cout, std::cerr); }
