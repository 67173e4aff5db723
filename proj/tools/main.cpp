#include "cli.hpp"

int main(int argc, char** argv) { return leinert::cli::run(argc, argv); }
