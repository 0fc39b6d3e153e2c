#include "signgate/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return signgate::run_cli(argc, argv, std::cout, std::cerr);
}
