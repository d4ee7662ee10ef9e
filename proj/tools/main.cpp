#include <iostream>

#include "lorenz/cli.hpp"

int main(int argc, char** argv) { return lorenz::cli::dispatch(argc, argv, std::cout, std::cerr); }
