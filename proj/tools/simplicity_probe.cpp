#include "simplicity/runner.hpp"

int main(int argc, char** argv) { return simplicity::cli_main(argc, argv); }
