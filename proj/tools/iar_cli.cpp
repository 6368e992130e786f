#include "iar/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return iar::run_cli(argc, argv, std::cout, std::cerr); }
