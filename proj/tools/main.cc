#include "anisolab/cli.h"

int main(int argc, char** argv) { return anisolab::cli::main(argc, argv); }
