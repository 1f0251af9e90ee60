#include "diqss/cli.hpp"

int main(int argc, char** argv) { return diqss::run_cli(argc, argv); }
