#include "riskner/cli.hpp"

int main(int argc, char** argv) { return riskner::cli::run(argc, argv); }
