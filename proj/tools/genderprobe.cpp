#include "genderprobe/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return genderprobe::run_cli(argc, argv, std::cout, std::cerr); }
