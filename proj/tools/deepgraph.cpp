#include "commands.hpp"

int main(int argc, char** argv) { return deepgraph::cli::run(argc, argv); }
