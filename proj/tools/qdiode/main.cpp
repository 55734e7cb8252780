#include <iostream>

#include "run.hpp"

int main(int argc, char** argv) { return qdh::run_cli(argc, argv, std::cout, std::cerr); }
