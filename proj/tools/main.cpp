#include <iostream>

#include "occdet/cli.hpp"

int main(int argc, char** argv)
{
    return occdet::run_cli(argc, argv, std::cout, std::cerr);
}
