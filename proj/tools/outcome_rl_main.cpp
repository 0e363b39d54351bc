#include "outcome_rl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return outcome_rl::cli_main(std::move(args));
}
