#include "hme/cli/app.hpp"

int main(int argc, char** argv) { return hme::cli::run_cli(argc, argv); }
