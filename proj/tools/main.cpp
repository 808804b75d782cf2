#include "sparseobs/cli.hpp"

int main(int argc, char** argv) { return sparseobs::run_cli(argc, argv); }
