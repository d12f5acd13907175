#include "mppseg/cli.hpp"

int main(int argc, char** argv) { return mppseg::run_cli(argc, argv); }
