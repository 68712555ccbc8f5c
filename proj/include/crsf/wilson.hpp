#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "crsf/rng.hpp"
#include "crsf/surface.hpp"
#include "crsf/walk.hpp"

namespace crsf {

struct acceptance_failure : std::runtime_error {
    double rate;
    acceptance_failure(const std::string& what, double r) : std::runtime_error(what), rate(r) {}
};

struct WilsonOptions {
    bool record_trajectories = false;
    bool keep_loops = false;
    long long step_cap = 100'000'000;
};

struct WilsonBranch {
    int start = -1;
    LerwResult walk;
};

struct WilsonRun {
    CRSFSample sample;
    std::vector<WilsonBranch> branches;
};

// Wired oriented CRSF by iterated loop-erased walks stopped at the boundary,
// the current forest, or the first noncontractible cycle. Vertices missing
// from order follow in id order.
WilsonRun run_wilson(const SurfaceGraph& g, const std::vector<int>& order, Rng& rng, const WilsonOptions& opt = {});
CRSFSample sample_wired_crsf(const SurfaceGraph& g, const std::vector<int>& order, Rng& rng);

// Skeleton branches from u_1, v_1, ..., u_k, v_k first; rejected unless the
// skeleton cuts the surface into annuli, then completed.
CRSFSample sample_temperleyan(const SurfaceGraph& g, Rng& rng, int max_attempts);

struct PtempResult {
    double estimate = 0, ess = 0, se = 0;
};
// Self-normalised estimate of E_temp[f] from P_wils samples with weights 2^{K dagger}.
PtempResult ptemp_estimate(const std::vector<CRSFSample>& samples, const std::function<double(const CRSFSample&)>& f);

// Vertex order from nested cell grids: at level j, cells of side
// (r/2) 6^-j, one vertex of H(2^-j r) per cell, farthest from the centre.
std::vector<int> good_algorithm_order(const SurfaceGraph& g, const std::vector<int>& H, double cx, double cy, double r,
                                      int j_max);

// Sample i uses stream (seed, i); the batch is independent of thread count.
std::vector<CRSFSample> sample_batch(const SurfaceGraph& g, Law law, long long n, std::uint64_t seed,
                                     int max_attempts = 100000);

}  // namespace crsf
