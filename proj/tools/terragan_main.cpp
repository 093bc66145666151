#include "terragan/cli.hpp"

int main(int argc, char** argv) { return terragan::run_cli(argc, argv); }
