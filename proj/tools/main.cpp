#include "lpinfer/cli.hpp"

int main(int argc, char** argv) { return lpinfer::cli::run(argc, argv); }
