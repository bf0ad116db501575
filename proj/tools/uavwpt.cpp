#include <uavwpt/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return uavwpt::cli::run_cli(argc, argv, std::cout, std::cerr);
}
