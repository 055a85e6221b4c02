#include "cli.hpp"

int main(int argc, char** argv) { return dw::cli::main_entry(argc, argv); }
