#include <vector>

#include "dyadic/cli.hpp"

int main(int argc, char** argv) {
    return dyadic::run(std::vector<std::string>(argv + 1, argv + argc));
}
