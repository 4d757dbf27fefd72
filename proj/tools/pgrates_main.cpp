#include "pgrates/cli.hpp"

int main(int argc, char** argv) { return pgrates::run_cli(argc, argv); }
