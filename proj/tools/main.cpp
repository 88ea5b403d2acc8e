#include "fusionclust/cli.hpp"

int main(int argc, char** argv)
{
    return fusionclust::cli::run({argv + 1, argv + argc});
}
