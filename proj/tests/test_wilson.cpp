#include <cmath>

#include "doctest.h"

#include "crsf/exactdist.hpp"
#include "crsf/fixtures.hpp"
#include "crsf/io.hpp"
#include "crsf/wilson.hpp"

using namespace crsf;

TEST_CASE("batches are reproducible and valid") {
    auto g = make_torus_grid(4, 4);
    auto a = sample_batch(g, Law::wwils, 50, 11);
    auto b = sample_batch(g, Law::wwils, 50, 11);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(same_sample(a[i], b[i]));
        CHECK_NOTHROW(check_crsf(g, a[i].out));
        CHECK(a[i].K >= 1);
    }
}

TEST_CASE("ptemp of a constant is exact and ess is bounded") {
    auto g = make_torus_grid(2, 2);
    auto batch = sample_batch(g, Law::wils, 200, 5);
    auto r = ptemp_estimate(batch, [](const CRSFSample&) { return 3.0; });
    CHECK(r.estimate == doctest::Approx(3.0));
    CHECK(r.ess > 0);
    CHECK(r.ess <= doctest::Approx(200.0));
}

TEST_CASE("enumerated torus law: temp is wils reweighted by 2^K dagger") {
    auto g = make_torus_grid(2, 2);
    auto t = enumerate_crsf_distribution(g);
    REQUIRE(!t.entries.empty());
    double norm = 0;
    for (auto& e : t.entries) norm += e.p_wils * std::ldexp(1.0, e.K_dagger);
    double sw = 0, st = 0;
    for (auto& e : t.entries) {
        CHECK(e.p_temp == doctest::Approx(e.p_wils * std::ldexp(1.0, e.K_dagger) / norm));
        sw += e.p_wwils;
        st += e.p_temp;
    }
    CHECK(sw == doctest::Approx(1.0));
    CHECK(st == doctest::Approx(1.0));
}
