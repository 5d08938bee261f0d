#include "sgwn/cli.hpp"

int main(int argc, char** argv) { return sgwn::cli::run(argc, argv); }
