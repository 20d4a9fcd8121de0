#include "locq/cli.hpp"

int main(int argc, char** argv) { return locq::cli::run(argc, argv); }
