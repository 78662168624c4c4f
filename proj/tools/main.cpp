#include <iostream>

#include "itmdp/cli.hpp"

int main(int argc, char** argv) { return itmdp::run_cli(argc, argv, std::cout, std::cerr); }
