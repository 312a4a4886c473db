#include <iostream>

#include "phaselab/commands.hpp"

int main(int argc, char** argv) { return phaselab::cli::dispatch(argc, argv, std::cout, std::cerr); }
