#include <iostream>

#include "ckbm/cli.hpp"

int main(int argc, char** argv) { return ckbm::run_cli(argc, argv, std::cout, std::cerr); }
