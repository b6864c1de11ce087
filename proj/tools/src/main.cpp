#include "mpqkd/cli.hpp"

int main(int argc, char** argv) { return mpqkd::cli::run(argc, argv); }
