#include <iostream>

#include "iekf/cli.hpp"

int main(int argc, char** argv) { return iekf::run_cli(argc, argv, std::cout, std::cerr); }
