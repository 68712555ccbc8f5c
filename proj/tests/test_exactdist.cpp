#include "doctest.h"

#include "crsf/exactdist.hpp"
#include "crsf/fixtures.hpp"

using namespace crsf;

TEST_CASE("chain branch law from x") {
    auto g = make_chain();
    auto law = exact_branch_law(g, 1, false);
    CHECK(law.total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(law.prob_of({0}) == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(law.prob_of({2, 4}) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(law.branches.size() == 2);
}

TEST_CASE("torus branch laws end in noncontractible cycles") {
    for (int n : {2, 3}) {
        auto g = make_torus_grid(n, n);
        auto law = exact_branch_law(g, 0, true);
        CHECK(std::abs(law.total() - 1) < 1e-12);
        for (auto& b : law.branches) {
            CHECK(b.end == BranchEnd::nc_cycle);
            std::vector<int> cyc(b.darts.begin() + b.cycle_start, b.darts.end());
            CHECK_FALSE(loop_class(g, cyc).is_identity());
        }
    }
}
