#include "jlsketch/cli.hpp"

int main(int argc, char** argv) { return jlsketch::cli::parse_and_dispatch(argc, argv); }
