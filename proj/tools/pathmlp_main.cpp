#include "pathmlp/cli.hpp"

int main(int argc, char** argv) { return pathmlp::cli_main(argc, argv); }
