#include "calev/commands.hpp"

int main(int argc, char** argv) { return calev::run_cli(argc, argv); }
