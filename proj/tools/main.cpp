#include "primscene/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return primscene::cli_run({argv + 1, argv + argc}, std::cout, std::cerr);
}
