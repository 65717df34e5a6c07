#include <iostream>

#include "unilab/cli.hpp"

int main(int argc, char** argv) { return unilab::cli::run_app(argc, argv, std::cout, std::cerr); }
