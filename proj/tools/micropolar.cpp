#include <iostream>

#include "micropolar/cli.hpp"

int main(int argc, char** argv) { return micropolar::cli::main_entry(argc, argv, std::cout, std::cerr); }
