#include "cli.hpp"

int main(int argc, char** argv) { return pcsisac::cli::run(argc, argv); }
