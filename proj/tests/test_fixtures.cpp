#include "doctest.h"

#include "crsf/fixtures.hpp"

using namespace crsf;

TEST_CASE("fixtures build valid maps") {
    CHECK_NOTHROW(make_torus_grid(2, 2));
    CHECK_NOTHROW(make_torus_grid(3, 3));
    CHECK_NOTHROW(make_torus_grid(4, 3));
    CHECK_NOTHROW(make_holed_torus(3, 0, {0, 1}));
    CHECK_NOTHROW(make_holed_torus(4, 0, {0, 0}));
    CHECK_NOTHROW(make_holed_torus(8, 1, {2, 2}));
    CHECK_NOTHROW(make_holed_torus(16, 2, {5, 5}));
    CHECK_NOTHROW(make_wired_grid(4));
    CHECK_NOTHROW(make_wired_disc(2.0));
    CHECK_NOTHROW(make_chain());
    CHECK_NOTHROW(make_annulus_ring(5));
    CHECK(make_wired_disc(2.0).interior_vertices().size() == 12);
}
