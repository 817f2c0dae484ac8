#include "qdcavity/cli.hpp"

#include <iostream>

int main(int argc, char **argv)
{
    return qdcavity::cli::run(argc, argv, std::cout, std::cerr);
}
