#include "eaq/pipeline.hpp"

int main(int argc, char** argv) { return eaq::run_command(argc, argv); }
