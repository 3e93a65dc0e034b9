#include "icd/io/cli.hpp"

int main(int argc, char** argv) { return icd::cli::run_cli(argc, argv); }
