#include "vinebud/cli.hpp"

int main(int argc, char** argv) { return vinebud::cli::run(argc, argv); }
