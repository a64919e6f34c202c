#include <cstdlib>
#include <iostream>

#include <unistd.h>

#include "ood/cli.hpp"

int main(int argc, char **argv) {
    ood::cli::Options options;
    options.color = std::getenv("NO_COLOR") == nullptr && ::isatty(STDOUT_FILENO) != 0;
    return ood::cli::run(argc, argv, std::cout, std::cerr, options);
}
