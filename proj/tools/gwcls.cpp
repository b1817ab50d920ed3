#include "gwcls/cli.hpp"

int main(int argc, char** argv) { return gwcls::cli::run(argc, argv); }
