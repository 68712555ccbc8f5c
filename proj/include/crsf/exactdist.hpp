#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "crsf/surface.hpp"

namespace crsf {

struct state_cap_exceeded : std::runtime_error {
    long long count;
    state_cap_exceeded(const std::string& what, long long n) : std::runtime_error(what), count(n) {}
};

enum class BranchEnd { boundary, target, nc_cycle, prefix };

struct Branch {
    std::vector<int> darts;  // for nc_cycle the closing dart is last
    double prob = 0;
    BranchEnd end = BranchEnd::boundary;
    int cycle_start = -1;

    // Vertices visited, including the end vertex.
    std::vector<int> vertices(const SurfaceGraph& g, int start) const;
};

struct BranchDistribution {
    std::vector<Branch> branches;
    long long states = 0;

    double total() const;
    double prob_of(const std::vector<int>& darts) const;
};

// Loop-erased walk as an absorbing chain on self-avoiding path states.
// The chain may start from a fixed prefix path; it then continues from the
// prefix tip. With absorb_prefix, erasing back into the prefix (including a
// contractible return to the tip) ends the walk with BranchEnd::prefix.
struct ChainSpec {
    int start = -1;
    std::vector<int> prefix;
    std::vector<char> target;
    bool nc_stop = false;
    bool absorb_prefix = false;
    long long state_cap = 1'000'000;
};

BranchDistribution exact_branch_law(const SurfaceGraph& g, const ChainSpec& spec);
BranchDistribution exact_branch_law(const SurfaceGraph& g, int start, bool nc_stop, long long state_cap = 1'000'000);

enum class PairMode { independent, wilson_sequential, conditioned_disjoint };

struct PairEntry {
    Branch first, second;
    double prob = 0;
};

struct PairDistribution {
    std::vector<PairEntry> entries;
    double total() const;
};

// Joint law of the branches from s1 and s2. In wilson_sequential mode the
// second walk also stops on the first branch. conditioned_disjoint keeps the
// sequential pairs whose second walk never meets the first branch and
// renormalises. keep_first restricts which entries are stored.
PairDistribution exact_pair_law(const SurfaceGraph& g, int s1, int s2, PairMode mode, bool nc_stop,
                                long long state_cap = 1'000'000,
                                const std::function<bool(const Branch&)>& keep_first = {});

struct CrsfEntry {
    std::vector<int> out;
    double weight = 0;
    int K = 0, K_dagger = 0;
    bool temperleyan = true;
    double p_wwils = 0, p_wils = 0, p_temp = 0;

    double prob(Law law) const { return law == Law::wwils ? p_wwils : law == Law::wils ? p_wils : p_temp; }
};

struct CrsfTable {
    std::vector<CrsfEntry> entries;
    double Z_wwils = 0, Z_wils = 0, Z_temp = 0;
    int find(const std::vector<int>& out) const;
};

CrsfTable enumerate_crsf_distribution(const SurfaceGraph& g, long long cap = 100'000);

}  // namespace crsf
