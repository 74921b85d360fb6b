#include <iostream>

#include "martweak/cli.hpp"

int main(int argc, char** argv) { return martweak::run(argc, argv, std::cout, std::cerr); }
