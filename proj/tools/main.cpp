#include "cli/commands.hpp"

int main(int argc, char** argv) { return dcop::cli::main(argc, argv); }
