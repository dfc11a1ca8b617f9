#include "lqgcap/cli/app.hpp"

int main(int argc, char** argv) { return lqgcap::cli::main_entry(argc, argv); }
