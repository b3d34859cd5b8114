#include "medtest/cli.hpp"

int main(int argc, char** argv) { return medtest::cli::run(argc, argv); }
