#include "doctest.h"

#include <cmath>

#include "crsf/exactdist.hpp"
#include "crsf/fixtures.hpp"
#include "crsf/loopmeasure.hpp"

using namespace crsf;

TEST_CASE("chain g and densities") {
    auto g = make_chain();
    LoopMeasure lm(g);
    auto dom = DomainSpec::interior(g, KillMode::exit_only);
    CHECK(lm.g_value(dom, 1) == doctest::Approx(4.0 / 3).epsilon(1e-12));
    CHECK(lm.f_value(dom, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(lm.log_mass_intersecting({{1}}, dom) == doctest::Approx(std::log(4.0 / 3)).epsilon(1e-12));
    CHECK(lm.density({{0}}, KillMode::exit_only) == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(lm.density({{2, 4}}, KillMode::exit_only) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    auto nc = DomainSpec::interior(g, KillMode::exit_or_nc);
    CHECK(lm.g_value(nc, 1) == doctest::Approx(4.0 / 3).epsilon(1e-12));
}

TEST_CASE("torus branch densities match the path-state oracle") {
    auto g = make_torus_grid(3, 3);
    LoopMeasure lm(g);
    auto law = exact_branch_law(g, 4, true);
    double worst = 0;
    for (auto& b : law.branches) {
        double dens = lm.density({b.darts}, KillMode::exit_or_nc);
        worst = std::max(worst, std::abs(dens - b.prob) / b.prob);
    }
    CHECK(worst < 1e-9);
}
