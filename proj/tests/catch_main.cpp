// Single compilation of the amalgamated test framework, shared by all suites.
#include <catch2/catch_amalgamated.cpp>
