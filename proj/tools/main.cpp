#include "acmorse/cli.hpp"

int main(int argc, char** argv) { return acmorse::run_command(argc, argv); }
