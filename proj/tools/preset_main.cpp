#include "presetforge/cli/cli.hpp"

int main(int argc, char** argv) { return presetforge::cli::run(argc, argv); }
