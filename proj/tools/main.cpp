#include "benfordseq/cli.hpp"

int main(int argc, char** argv) { return benfordseq::cli_main(argc, argv); }
