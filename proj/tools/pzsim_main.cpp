#include "pzsim/cli.hpp"

int main(int argc, char** argv)
{
    return pzsim::cli_dispatch(argc, argv);
}
