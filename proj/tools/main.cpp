#include <string>
#include <vector>

#include "fvtaxis/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fvtaxis::cli_main(args);
}
