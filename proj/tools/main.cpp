#include "imdev/cli.hpp"

int main(int argc, char** argv) { return imdev::cli::run(argc, argv); }
