#include <catch2/catch_amalgamated.hpp>

#include <margins/margins.hpp>

TEST_CASE("placeholder group_analysis") { REQUIRE(true); }
