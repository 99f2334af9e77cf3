#include "commands.hpp"

int main(int argc, char** argv) { return icann::cli::run_cli(argc, argv); }
