#include "spinbath/cli.hpp"

int main(int argc, char** argv) { return spinbath::run_cli(argc, argv); }
