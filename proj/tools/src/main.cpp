#include <iostream>

#include "canopy_app/app.hpp"

int main(int argc, char** argv) { return canopy::app::run(argc, argv, std::cout, std::cerr); }
