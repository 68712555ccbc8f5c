#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "crsf/rng.hpp"
#include "crsf/surface.hpp"
#include "crsf/walk.hpp"

namespace crsf {

enum class KillMode { exit_only, exit_or_nc };

struct DomainSpec {
    std::vector<char> allowed;  // per vertex; never contains boundary vertices
    KillMode mode = KillMode::exit_only;

    static DomainSpec interior(const SurfaceGraph& g, KillMode mode);
    DomainSpec without(const std::vector<int>& vertices) const;
    bool contains(int v) const { return allowed[v] != 0; }
};

// log(q/|l|) for a rooted loop.
double loop_log_mass(const SurfaceGraph& g, const std::vector<int>& darts);
// log of the unrooted mass: distinct rotations times q/|l|.
double unrooted_log_mass(const SurfaceGraph& g, const std::vector<int>& darts);
double log_q(const SurfaceGraph& g, const std::vector<int>& darts);

// Vertices a path contributes to loop-measure sums: the tails of its darts.
std::vector<int> path_tails(const SurfaceGraph& g, const std::vector<int>& darts);

// Probability that the walk from start, first entering stop (always
// including the boundary), does so at a vertex of good. With strict the
// hitting time is taken over t >= 1.
double hit_probability(const SurfaceGraph& g, int start, const std::vector<char>& stop, const std::vector<char>& good,
                       bool strict);

// g, f and log-mass queries with a cache keyed by (domain, vertex, mode).
class LoopMeasure {
public:
    explicit LoopMeasure(const SurfaceGraph& g, long long state_cap = 1'000'000) : g_(g), cap_(state_cap) {}

    const SurfaceGraph& graph() const { return g_; }

    double g_value(const DomainSpec& d, int x);
    // Return probability from a separate first-return solve (exit-only).
    double f_value(const DomainSpec& d, int x);

    // Sum over path vertices, in order, of log g(A_j, x_j), removing each
    // vertex from the domain after use. Repeated and boundary vertices skip.
    double log_mass_intersecting(const std::vector<std::vector<int>>& vertex_paths, const DomainSpec& d);

    // q of the union of darts (shared darts once) times exp of the loop mass.
    double density(const std::vector<std::vector<int>>& dart_paths, KillMode mode);

    // Pair factor: Lambda(I(eta1) cap I(eta2)) by inclusion-exclusion.
    double pair_rn_factor(const std::vector<int>& v1, const std::vector<int>& v2, const DomainSpec& d);

    // P_x[tau_M <= tau_eta]: from the tip of eta, reach the boundary or close a
    // noncontractible loop before erasing back into eta.
    double surface_escape(const std::vector<int>& eta_darts, int start);

    // Expected visits to x before the kill, exact on the path-state chain.
    double g_nc(const DomainSpec& d, int x);

    long long cache_size() const { return static_cast<long long>(cache_.size()); }

private:
    double g_exit(const DomainSpec& d, int x);
    const SurfaceGraph& g_;
    long long cap_;
    std::map<std::string, double> cache_;
};

// Marginal evaluators for a loop-erased walk from x0 stopped at the boundary.
// eta_minus is a prefix from x0, eta_plus a suffix ending on the boundary.
struct PlanarMarginals {
    LoopMeasure& lm;
    double prefix(const std::vector<int>& eta_minus, int x0);
    double suffix(const std::vector<int>& eta_plus, int x0, int x_plus);
    double prefix_suffix(const std::vector<int>& eta_minus, const std::vector<int>& eta_plus, int x0, int x_plus);
    // P(Y = gamma | eta_minus prefix of Y).
    double conditional(const std::vector<int>& gamma, size_t prefix_len, int x0);
};

// Surface versions: loop masses restricted to eta-contractible loops.
struct SurfaceMarginals {
    LoopMeasure& lm;
    double prefix(const std::vector<int>& eta, int z);
    double conditional(const std::vector<int>& gamma, size_t prefix_len, int z);
};

// Loop-mass series: sum over n of (tr Q_A^n - tr Q_{A minus S}^n)/n, the mass of
// loops in A meeting S, truncated once the certified tail is below tol.
struct SeriesResult {
    double mass = 0;
    double tail_bound = 0;
    int terms = 0;
};
SeriesResult loop_mass_series(const SurfaceGraph& g, const std::vector<char>& allowed, const std::vector<int>& hit,
                              double tol = 1e-10);

// Mass of all loops in the interior with length > L, exactly:
// -log det(I - Q) - sum_{n <= L} tr(Q^n)/n.
double long_loop_mass(const SurfaceGraph& g, int L);

// Whether the subgraph spanned by these undirected edges carries a
// noncontractible cycle.
bool support_has_nc_cycle(const SurfaceGraph& g, const std::vector<int>& darts);

// Mass of contractible rooted loops in the interior with length <= L whose
// support carries a noncontractible cycle.
double nc_support_mass(const SurfaceGraph& g, int L);

struct SoupLoop {
    std::vector<int> darts;  // canonical rotation
    double log_q = 0;
    Word cls;
    bool visits(const SurfaceGraph& g, int v) const;
};
using LoopSoup = std::vector<SoupLoop>;

SoupLoop make_soup_loop(const SurfaceGraph& g, std::vector<int> darts);

struct SoupOptions {
    std::vector<int> order;  // vertex order; remaining domain vertices follow by id
    long long excursion_budget = 10'000'000;
};

// Poisson loop soup with intensity Lambda restricted to the domain (and to
// Wilson-contractible loops in nc mode), by the rooted-vertex decomposition.
LoopSoup sample_loop_soup(LoopMeasure& lm, const DomainSpec& d, Rng& rng, const SoupOptions& opt = {});

// Loops carried by one loop-erased walk: for every vertex of the erased path
// the walk between its first and last visit is split into excursions, which
// are grouped by the cycles of a uniform random permutation.
LoopSoup soup_from_trajectory(const SurfaceGraph& g, const WalkTrajectory& traj, const std::vector<int>& branch,
                              Rng& rng);

// Mean number of loops per realisation satisfying pred, with a normal CI.
Estimate empirical_mass(const std::function<bool(const SoupLoop&)>& pred,
                        const std::function<LoopSoup(long long)>& realisation, long long n);

}  // namespace crsf
