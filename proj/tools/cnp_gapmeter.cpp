#include <iostream>

#include "cnpgap/cli.hpp"

int main(int argc, char** argv) { return cnpgap::cli::run(argc, argv, std::cout, std::cerr); }
