#include "galinv/cli.hpp"

int main(int argc, char** argv) { return galinv::cli::run(argc, argv); }
