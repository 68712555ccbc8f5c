#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crsf/io.hpp"
#include "crsf/surface.hpp"
#include "crsf/walk.hpp"

namespace crsf {

struct SuiteOptions {
    std::uint64_t seed = 1;
    long long samples = 100'000;      // Monte Carlo size
    long long state_cap = 2'000'000;  // exact path-state chains
    long long enum_cap = 300'000;     // CRSF enumeration
    double tol = 1e-9;
    double prob_floor = 1e-12;        // branches below this mass are skipped
    int short_len = 3;                // first-branch length bound for pair-rn
    int start_limit = 0;              // 0: every interior start
    int pair_starts = 3;              // start pairs for multi-branch identities
    int band_pairs = 4;               // path pairs for the surface band
    int band_L = 10;                  // enumeration length for the band width
    double z_freq = 4, z_ptemp = 3, z_soup = 4;
    // Scale system for the pairchain suite.
    double delta = 0.5, origin_x = 0, origin_y = 0;
    int scales = 2;
};

const std::vector<std::string>& suite_names();
SuiteResult run_suite(const std::string& name, const SurfaceGraph& g, const SuiteOptions& opt);

SuiteResult suite_density_exit(const SurfaceGraph& g, const SuiteOptions& opt);
SuiteResult suite_density_surface(const SurfaceGraph& g, const SuiteOptions& opt);
SuiteResult suite_pair_rn(const SurfaceGraph& g, const SuiteOptions& opt);
SuiteResult suite_marginals(const SurfaceGraph& g, const SuiteOptions& opt);
SuiteResult suite_loop_soup(const SurfaceGraph& g, const SuiteOptions& opt);
SuiteResult suite_pairchain(const SurfaceGraph& g, const SuiteOptions& opt);
SuiteResult suite_temperleyan(const SurfaceGraph& g, const SuiteOptions& opt);

// Every dart label trivial: all loops contractible, planar formulas apply.
bool labels_trivial(const SurfaceGraph& g);

struct StatsOptions {
    std::string law = "wwils";
    long long n = 10'000;
    std::uint64_t seed = 1;
    double q = 2;
    int max_attempts = 100'000;
    bool has_crossing = false;
    CrossingSpec crossing;
};

// Empirical statistics with confidence intervals.
nlohmann::json run_stats(const std::string& metric, const SurfaceGraph& g, const StatsOptions& opt);

}  // namespace crsf
