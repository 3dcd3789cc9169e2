#include <catch2/catch_amalgamated.hpp>

#include "mkdvlab/mkdvlab.hpp"

using namespace mkdv;

TEST_CASE("smoke: profile and inner product") {
    Grid grid(80.0, 256);
    Field q = profile_Q(1.0, grid);
    REQUIRE(q.sup_norm() == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
    REQUIRE(inner_product(q, q) == Catch::Approx(4.0).margin(1e-8));
}
