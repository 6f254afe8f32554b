#include "mtfee/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mtfee::run_cli(argc, argv, std::cout, std::cerr); }
