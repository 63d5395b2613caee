#include "backheat/cli.hpp"

int main(int argc, char** argv) { return backheat::cli::run(argc, argv); }
