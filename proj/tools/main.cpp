#include "repoloc/cli.hpp"

int main(int argc, char** argv) {
    return repoloc::cli::run_cli(argc, argv);
}
