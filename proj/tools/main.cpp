#include "cli.hpp"

int main(int argc, char** argv) { return animesh::cli::run(argc, argv); }
