#include "portiontrack/cli.hpp"

int main(int argc, char** argv) { return ptrack::run_cli(argc, argv); }
