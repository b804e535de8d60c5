#include <iostream>

#include "cfent/cli/app.hpp"

int main(int argc, char** argv)
{
    return cfent::cli::run(argc, argv, std::cout, std::cerr);
}
