#include "gridform/cli.hpp"

int main(int argc, char** argv) { return gridform::run_cli(argc, argv); }
