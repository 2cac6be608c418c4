#include "cli/commands.hpp"

int main(int argc, char** argv) { return risktube::cli::run(argc, argv); }
