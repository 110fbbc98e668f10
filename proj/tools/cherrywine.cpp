#include <iostream>

#include "cherrywine/cli.hpp"

int main(int argc, char** argv) { return cherrywine::run_cli(argc, argv, std::cout, std::cerr); }
