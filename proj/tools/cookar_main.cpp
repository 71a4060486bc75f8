#include "cookar/cli.hpp"

int main(int argc, char** argv) { return cookar::cli::dispatch(argc, argv); }
