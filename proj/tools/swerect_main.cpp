#include "swerect/cli.hpp"

int main(int argc, char** argv) { return swerect::cli::run(argc, argv); }
