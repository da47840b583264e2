#include "epifamily/cli.hpp"

int main(int argc, char** argv) { return epifamily::cli::run_command(argc, argv); }
