#include <prefnav/cli/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return prefnav::cli::dispatch(argc, argv, std::cout, std::cerr); }
