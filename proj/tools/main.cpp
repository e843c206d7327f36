#include "kslab/cli.hpp"

int main(int argc, char** argv) { return kslab::cli::run(argc, argv); }
