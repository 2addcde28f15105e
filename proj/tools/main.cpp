#include "cli.hpp"

int main(int argc, char** argv) { return a2f::cli::run_command(argc, argv); }
