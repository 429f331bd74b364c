#include "support/fixture_suite.hpp"

#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: gts_make_fixture <dir>\n";
        return 64;
    }
    const auto suite = gts::fixture::write_suite(argv[1]);
    std::cout << suite.config.string() << "\n";
}
