#include "foldcert/cli.hpp"

int main(int argc, char** argv) { return foldcert::cli_main(argc, argv); }
