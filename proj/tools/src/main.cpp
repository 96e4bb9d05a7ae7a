#include "ctrtab/cli/app.hpp"

int main(int argc, char** argv) { return ctrtab::cli::main_entry(argc, argv); }
