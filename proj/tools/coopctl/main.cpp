#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return coopctl::run(argc, argv, std::cout, std::cerr); }
