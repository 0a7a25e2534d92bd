#include <iostream>

#include "fairstyle/cli/app.hpp"

int main(int argc, char** argv) { return fairstyle::cli::run_cli(argc, argv, std::cerr); }
