#include "etafit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return etafit::run_cli(argc, argv, std::cout, std::cerr);
}
