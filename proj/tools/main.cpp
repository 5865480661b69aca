#include "commands.hpp"

#include <exception>
#include <iostream>

int main(int argc, char** argv) {
    try {
        return rbdsde::cli::run({argv, argv + argc});
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
