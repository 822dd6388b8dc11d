#include <iostream>

#include "pcinf/cli.hpp"

int main(int argc, char** argv) { return pcinf::run_cli(argc, argv, std::cout, std::cerr); }
