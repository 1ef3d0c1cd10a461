#include <iostream>

#include "dszog/experiment.hpp"

int main(int argc, char** argv) { return dszog::cli_main(argc, argv, std::cout, std::cerr); }
