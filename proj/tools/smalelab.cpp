#include "smalelab/cli.hpp"

int main(int argc, char** argv) { return smalelab::cli::run(argc, argv); }
