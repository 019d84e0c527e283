#include <iostream>

#include "defgraph/cli.hpp"

int main(int argc, char** argv) { return defgraph::cli_main(argc, argv, std::cout, std::cerr); }
