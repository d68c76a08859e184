#include <iostream>

#include "rellandau/cli.hpp"

int main(int argc, char** argv) { return rellandau::cli::run(argc, argv, std::cout, std::cerr); }
