#include <catch2/catch_amalgamated.hpp>

#include <margins/margins.hpp>

TEST_CASE("placeholder distributions") { REQUIRE(true); }
