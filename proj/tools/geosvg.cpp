#include <iostream>

#include "geosvg/cli.hpp"

int main(int argc, char** argv) { return geosvg::run(argc, argv, std::cout, std::cerr); }
