#include <iostream>

#include "ofdm/cli.hpp"

int main(int argc, char** argv) { return ofdm::run_cli(argc, argv, std::cout, std::cerr); }
