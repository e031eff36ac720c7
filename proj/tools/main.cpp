#include <iostream>

#include "ruinprob_cli.hpp"

int main(int argc, char** argv) { return ruinprob::cli::main_entry(argc, argv, std::cout, std::cerr); }
