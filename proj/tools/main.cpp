#include "rsodc/cli/commands.hpp"

int main(int argc, char** argv) { return rsodc::cli::run(argc, argv); }
