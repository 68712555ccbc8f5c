#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "crsf/exactdist.hpp"
#include "crsf/fixtures.hpp"
#include "crsf/pairchain.hpp"

using namespace crsf;

namespace {

struct Disc {
    SurfaceGraph g = make_wired_disc(2.0);
    ScaleSystem s;
    Disc() {
        s.delta = 0.5;
        s.N = 2;
        s.x1 = nearest_vertex(g, -0.5, -0.5);
        s.x2 = nearest_vertex(g, 0.5, -0.5);
    }
};

// Winding counted on the opposite ray, along -x.
int neg_ray(const SurfaceGraph& g, int d) {
    const auto& e = g.edges[d];
    double py = g.vertices[e.tail].y, qy = g.vertices[e.head].y;
    if ((py < 0) == (qy < 0)) return 0;
    double px = g.vertices[e.tail].x, qx = g.vertices[e.head].x;
    double x = px - py * (qx - px) / (qy - py);
    if (!(x < 0)) return 0;
    return qy >= 0 ? -1 : 1;
}

// Zero-winding mass of loops in the ball meeting both sets, by a
// length-by-length transfer sum over rooted loops.
double oracle_mass_both(const SurfaceGraph& g, const ScaleSystem& s, int m, const std::set<int>& a,
                        const std::set<int>& b, int L = 500, int W = 40) {
    const int V = g.num_vertices(), S = 2 * W + 1;
    auto idx = [&](int v, int w, int h) { return (v * S + (w + W)) * 4 + h; };
    double total = 0;
    for (int r = 0; r < V; ++r) {
        if (!s.inside(g, r, m)) continue;
        std::vector<double> cur(V * S * 4, 0.0), nxt;
        cur[idx(r, 0, (a.count(r) ? 1 : 0) | (b.count(r) ? 2 : 0))] = 1;
        for (int n = 1; n <= L; ++n) {
            nxt.assign(cur.size(), 0.0);
            for (int v = 0; v < V; ++v)
                for (int w = -W; w <= W; ++w)
                    for (int h = 0; h < 4; ++h) {
                        double x = cur[idx(v, w, h)];
                        if (x == 0) continue;
                        for (int d : g.out_darts(v)) {
                            int u = g.edges[d].head;
                            if (!s.inside(g, u, m)) continue;
                            int w2 = w + neg_ray(g, d);
                            if (w2 < -W || w2 > W) continue;
                            int h2 = h | (a.count(u) ? 1 : 0) | (b.count(u) ? 2 : 0);
                            nxt[idx(u, w2, h2)] += x * g.q(d);
                        }
                    }
            cur.swap(nxt);
            total += cur[idx(r, 0, 3)] / n;
        }
    }
    return total;
}

std::set<int> vset(const SurfaceGraph& g, const std::vector<int>& darts, int start) {
    std::set<int> r;
    for (int v : walk_vertices(g, darts, start))
        if (!g.is_boundary(v)) r.insert(v);
    return r;
}

using Key = std::pair<std::vector<int>, std::vector<int>>;

}  // namespace

TEST_CASE("twisted-determinant winding mass matches the transfer oracle") {
    Disc d;
    PairChain pc(d.g, d.s);
    auto law = exact_pair_law(d.g, d.s.x1, d.s.x2, PairMode::independent, false);
    int checked = 0;
    for (size_t i = 0; i < law.entries.size() && checked < 6; i += law.entries.size() / 6 + 1) {
        auto& e = law.entries[i];
        auto a = vset(d.g, e.first.darts, d.s.x1), b = vset(d.g, e.second.darts, d.s.x2);
        for (int m = 1; m <= 2; ++m) {
            double got = pc.loop_mass_both(m, {a.begin(), a.end()}, {b.begin(), b.end()});
            CHECK(got == doctest::Approx(oracle_mass_both(d.g, d.s, m, a, b)).epsilon(1e-9));
        }
        ++checked;
    }
}

TEST_CASE("lambda_N normalised is the conditioned pair law") {
    Disc d;
    PairChain pc(d.g, d.s);
    auto law = exact_pair_law(d.g, d.s.x1, d.s.x2, PairMode::conditioned_disjoint, false);
    double Z = pc.Z(2);
    double worst = 0, mass = 0;
    for (auto& e : law.entries) {
        PathPair p{e.first.darts, e.second.darts};
        double v = pc.lambda(p, 2) / Z;
        worst = std::max(worst, std::abs(v - e.prob) / e.prob);
        mass += v;
    }
    CHECK(worst < 1e-9);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pc.Z(2) <= pc.Z(1));
}

TEST_CASE("transition law equals the conditional law of the conditioned pair") {
    Disc d;
    PairChain pc(d.g, d.s);
    auto law = exact_pair_law(d.g, d.s.x1, d.s.x2, PairMode::conditioned_disjoint, false);
    std::map<Key, double> p1, p2;
    for (auto& e : law.entries) {
        PathPair full{e.first.darts, e.second.darts};
        auto h1 = decompose(d.g, d.s, full, 1, 1).head;
        p1[{h1.first, h1.second}] += e.prob;
        p2[{full.first, full.second}] += e.prob;
    }
    double worst = 0, worst_sum = 0;
    for (auto& [k1, w1] : p1) {
        PathPair pm{k1.first, k1.second};
        double sum = 0;
        for (auto& next : pc.extensions(pm, 2)) {
            double t = pc.transition_prob(pm, next, 1);
            auto it = p2.find({next.first, next.second});
            double want = it == p2.end() ? 0 : it->second / w1;
            worst = std::max(worst, std::abs(t - want) / std::max(want, 1e-300));
            sum += t;
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1));
    }
    CHECK(worst < 1e-9);
    CHECK(worst_sum < 1e-9);
}

TEST_CASE("h matches a brute-force double sum over independent branches") {
    Disc d;
    PairChain pc(d.g, d.s);
    auto b1 = exact_branch_law(d.g, d.s.x1, false), b2 = exact_branch_law(d.g, d.s.x2, false);
    std::map<Key, double> lamN, mu1;
    for (auto& x : b1.branches)
        for (auto& y : b2.branches) {
            PathPair full{x.darts, y.darts};
            auto h = decompose(d.g, d.s, full, 1, 1).head;
            Key k{h.first, h.second};
            mu1[k] += x.prob * y.prob;
            auto a = vset(d.g, x.darts, d.s.x1), b = vset(d.g, y.darts, d.s.x2);
            bool disjoint = true;
            for (int v : a) disjoint &= !b.count(v);
            if (!disjoint) continue;
            lamN[k] += x.prob * y.prob * std::exp(-pc.loop_mass_both(2, {a.begin(), a.end()}, {b.begin(), b.end()}));
        }
    int checked = 0;
    for (auto& [k, ln] : lamN) {
        PathPair pm{k.first, k.second};
        auto a = vset(d.g, pm.first, d.s.x1), b = vset(d.g, pm.second, d.s.x2);
        double lam1 = mu1[k] * std::exp(-oracle_mass_both(d.g, d.s, 1, a, b));
        CHECK(pc.lambda(pm, 1) == doctest::Approx(lam1).epsilon(1e-9));
        CHECK(pc.h_value(pm, 1) == doctest::Approx(ln / lam1).epsilon(1e-9));
        if (++checked == 8) break;
    }
    CHECK(checked > 0);
}

TEST_CASE("lambda edge cases") {
    Disc d;
    PairChain pc(d.g, d.s);
    auto law = exact_pair_law(d.g, d.s.x1, d.s.x2, PairMode::conditioned_disjoint, false);
    PathPair p{law.entries[0].first.darts, law.entries[0].second.darts};
    CHECK(pc.h_value(p, 2) == doctest::Approx(1.0).epsilon(1e-12));
    // Both paths through the same vertex.
    auto ind = exact_pair_law(d.g, d.s.x1, d.s.x2, PairMode::independent, false);
    bool found = false;
    for (auto& e : ind.entries) {
        PathPair q{e.first.darts, e.second.darts};
        if (pc.disjoint(q)) continue;
        CHECK(pc.lambda(q, 2) == 0);
        found = true;
        break;
    }
    CHECK(found);
    // A level-2 pair has only itself as extension at level 2.
    auto ext = pc.extensions(p, 2);
    REQUIRE(ext.size() == 1);
    CHECK(pc.lambda_marginal(2, p, 2) == doctest::Approx(pc.lambda(p, 2)).epsilon(1e-14));
    CHECK_THROWS_AS(pc.lambda(PathPair{}, 1), std::invalid_argument);
}

TEST_CASE("pair confined away from double loops has lambda equal to mu") {
    // Two stubs hanging off x1 and x2 into separate boundary vertices.
    std::vector<std::array<double, 2>> pts{{-0.5, -0.5}, {0.5, -0.5}};
    std::vector<std::pair<int, int>> links{{0, 1}};
    std::vector<std::pair<int, std::array<double, 2>>> ghosts{{0, {-1, 0}}, {0, {0, 1}}, {0, {0, -1}},
                                                               {1, {1, 0}}, {1, {0, 1}}, {1, {0, -1}}};
    auto g = make_planar_wired(pts, links, ghosts);
    ScaleSystem s;
    s.delta = 0.5;
    s.N = 1;
    s.x1 = 0;
    s.x2 = 1;
    PairChain pc(g, s);
    for (auto& p : pc.admissible(1)) {
        auto a = walk_vertices(g, p.first, 0), b = walk_vertices(g, p.second, 1);
        // The only doubly-hitting loops run through the shared edge.
        double expected = pc.mu(p) * std::exp(-pc.loop_mass_both(1, a, b));
        CHECK(pc.lambda(p, 1) == doctest::Approx(expected).epsilon(1e-12));
        if (p.first.size() == 1 && p.second.size() == 1) {
            std::vector<int> none;
            CHECK(pc.loop_mass_both(1, none, b) == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("decompose recomposes and splits at the last visit") {
    Disc d;
    auto law = exact_pair_law(d.g, d.s.x1, d.s.x2, PairMode::independent, false);
    for (auto& e : law.entries) {
        PathPair p{e.first.darts, e.second.darts};
        for (int m = 1; m <= 2; ++m)
            for (int n = m; n <= 2; ++n) {
                auto dec = decompose(d.g, d.s, p, m, n);
                auto back = concat(concat(dec.head, dec.middle), dec.tail);
                REQUIRE(back.first == p.first);
                REQUIRE(back.second == p.second);
                // Scan oracle: the tail has no vertex in B_n, and the vertex
                // before it is in B_n.
                auto vs = walk_vertices(d.g, p.first, d.s.x1);
                size_t k = p.first.size() - dec.tail.first.size();
                for (size_t i = k; i < vs.size(); ++i) REQUIRE_FALSE(d.s.inside(d.g, vs[i], n));
                REQUIRE(d.s.inside(d.g, vs[k - 1], n));
            }
    }
    PathPair none;
    CHECK_THROWS_AS(decompose(d.g, d.s, none, 1, 1), std::domain_error);
}

TEST_CASE("separation predicates agree with a pairwise scan") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::array<double, 2>> a(1 + trial % 7), b(1 + trial % 5);
        for (auto& p : a) p = {U(rng), U(rng)};
        for (auto& p : b) p = {U(rng), U(rng)};
        double t = 0.1 + (trial % 10) * 0.3;
        bool brute = true;
        for (auto& p : a)
            for (auto& q : b) brute &= std::hypot(p[0] - q[0], p[1] - q[1]) >= t;
        REQUIRE(point_sets_separated(a, b, t) == brute);
    }
}

TEST_CASE("separation on straight and touching rays") {
    // Horizontal line of 16 vertices wired at both ends.
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < 16; ++i) pts.push_back({i - 7.5, -0.5});
    std::vector<std::pair<int, int>> links;
    for (int i = 0; i + 1 < 16; ++i) links.push_back({i, i + 1});
    std::vector<std::pair<int, std::array<double, 2>>> ghosts{{0, {-1, 0}}, {15, {1, 0}}};
    auto g = make_planar_wired(pts, links, ghosts);
    ScaleSystem s;
    s.delta = 0.5;
    s.N = 4;
    s.x1 = 7;
    s.x2 = 8;
    PathPair p;
    auto step = [&](int from, int to) {
        for (int dd : g.all_out(from))
            if (g.edges[dd].head == to) return dd;
        return -1;
    };
    for (int v = 7; v > 0; --v) p.first.push_back(step(v, v - 1));
    for (int v = 8; v < 15; ++v) p.second.push_back(step(v, v + 1));
    p.first.push_back(g.all_out(0)[0] == step(0, 1) ? g.all_out(0)[1] : g.all_out(0)[0]);
    p.second.push_back(g.all_out(15)[0] == step(15, 14) ? g.all_out(15)[1] : g.all_out(15)[0]);
    for (int n = 1; n <= 3; ++n) CHECK(sep_n(g, s, p, n));
    CHECK(sep_mn(g, s, p, 1, 2));
    SepConstants tight;
    tight.c_sep = 4.0;
    CHECK_FALSE(sep_n(g, s, p, 2, tight));
}
