#include "powcheck/cli.hpp"

int main(int argc, char** argv) { return powcheck::run(argc, argv); }
