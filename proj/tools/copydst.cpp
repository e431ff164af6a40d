#include <copydst/cli.hpp>

int main(int argc, char** argv) { return copydst::run_cli(argc, argv); }
