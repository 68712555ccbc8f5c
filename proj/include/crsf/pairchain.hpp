#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "crsf/loopmeasure.hpp"
#include "crsf/surface.hpp"

namespace crsf {

// Concentric balls B_n = B(origin, 2^n delta), 1 <= n <= N, on a wired planar
// graph. The origin sits inside the marked face; x1 and x2 are neighbours.
// The wired boundary vertex lies outside every ball.
struct ScaleSystem {
    double ox = 0, oy = 0;
    double delta = 0.5;
    int N = 2;
    int x1 = -1, x2 = -1;

    double radius(double n) const;
    bool inside(const SurfaceGraph& g, int v, double n) const;
    void validate(const SurfaceGraph& g) const;
};

struct PathPair {
    std::vector<int> first, second;  // darts from x1 and x2
};

struct Decomposition {
    PathPair head;    // up to and including the first vertex outside B_m
    PathPair middle;  // remainder
    PathPair tail;    // after the last visit to B_n
};

// Interior vertex closest to (x, y).
int nearest_vertex(const SurfaceGraph& g, double x, double y);

// Vertices of a dart path from start, start included.
std::vector<int> walk_vertices(const SurfaceGraph& g, const std::vector<int>& darts, int start);

Decomposition decompose(const SurfaceGraph& g, const ScaleSystem& s, const PathPair& pair, int m, int n);
PathPair concat(const PathPair& a, const PathPair& b);

// Crossing number of a dart with the ray from the origin along +x.
int ray_crossing(const SurfaceGraph& g, double ox, double oy, int d);

// Exact evaluation of lambda_m, its extension sums, the h-transform and the
// chain on path pairs. mu is the law of two independent loop-erased walks to
// the wired boundary.
class PairChain {
public:
    PairChain(const SurfaceGraph& g, const ScaleSystem& s, long long cap = 2'000'000, int fourier_points = 128);

    const ScaleSystem& system() const { return s_; }

    // Mass of loops in the domain with zero winding about the origin.
    double winding_zero_mass(const std::vector<char>& domain);
    // Zero-winding mass of loops in B_m meeting both vertex sets.
    double loop_mass_both(int m, const std::vector<int>& v1, const std::vector<int>& v2);

    bool is_pair_at(const PathPair& p, int m) const;  // shape check for pair_m
    bool disjoint(const PathPair& p) const;
    double mu(const PathPair& p);
    double lambda(const PathPair& pair_m, int m);
    double lambda_marginal(int n, const PathPair& pair_m, int m);
    double h_value(const PathPair& pair_m, int m);
    double transition_prob(const PathPair& pair_m, const PathPair& pair_next, int m);

    // Extensions of a one-sided path from level m to level n.
    std::vector<std::vector<int>> extensions(const std::vector<int>& darts, int start, int n) const;
    std::vector<PathPair> extensions(const PathPair& pair_m, int n) const;
    // Pairs at level n in A_n.
    std::vector<PathPair> admissible(int n) const;
    double Z(int n);

private:
    const SurfaceGraph& g_;
    ScaleSystem s_;
    long long cap_;
    int M_;
    LoopMeasure lm_;
    std::map<std::string, double> wz_cache_;
    std::vector<int> ray_;
};

// Minimum distance between the two point sets is at least t (spatial hash).
bool point_sets_separated(const std::vector<std::array<double, 2>>& a, const std::vector<std::array<double, 2>>& b,
                          double t);

struct SepConstants {
    double c_sep = 0.125;   // Sep_n threshold in units of 2^n delta
    double c_dot = 0.5;     // dotted Sep_{n,N} threshold
    double c_mid = 0.25;    // middle-piece distance in units of 2^m delta
};

// Sep_n for a pair at level n (or longer; cut at the first exit of B_n).
bool sep_n(const SurfaceGraph& g, const ScaleSystem& s, const PathPair& pair, int n, const SepConstants& c = {});
// Dotted separation for pieces started at v1, v2 crossing B_N minus B_n.
bool sep_dot(const SurfaceGraph& g, const ScaleSystem& s, const PathPair& tail, int v1, int v2, int n,
             const SepConstants& c = {});
// Sep_{m,n} for a full pair.
bool sep_mn(const SurfaceGraph& g, const ScaleSystem& s, const PathPair& pair, int m, int n, const SepConstants& c = {});

}  // namespace crsf
