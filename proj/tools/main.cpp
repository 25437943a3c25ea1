#include "cli.hpp"

int main(int argc, char** argv) { return isip4d::cli::run_cli(argc, argv); }
