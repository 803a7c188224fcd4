#include "cli/app.hpp"

int main(int argc, char** argv) { return ambiprobe::cli::run(argc, argv); }
