#include "pnmc/cli.hpp"

int main(int argc, char** argv) { return pnmc::cli::run(argc, argv); }
