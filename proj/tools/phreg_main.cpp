#include "phreg/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
	return phreg::cli_dispatch({argv, argv + argc}, std::cout, std::cerr);
}
