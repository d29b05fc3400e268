#include "kinetic/cli.hpp"

int main(int argc, char** argv) { return kinetic::cli::main(argc, argv); }
