#include <iostream>

#include "wigner/cli.hpp"

int main(int argc, char** argv) {
    return wigner::cli::run_cli(argc, argv, std::cout, std::cerr);
}
