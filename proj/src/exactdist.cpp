#include "crsf/exactdist.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <map>
#include <set>

namespace crsf {

std::vector<int> Branch::vertices(const SurfaceGraph& g, int start) const {
    std::vector<int> vs{start};
    for (int d : darts) vs.push_back(g.edges[d].head);
    return vs;
}

double BranchDistribution::total() const {
    double s = 0;
    for (auto& b : branches) s += b.prob;
    return s;
}

double BranchDistribution::prob_of(const std::vector<int>& darts) const {
    for (auto& b : branches)
        if (b.darts == darts) return b.prob;
    return 0;
}

double PairDistribution::total() const {
    double s = 0;
    for (auto& e : entries) s += e.prob;
    return s;
}

namespace {

struct Node {
    int parent;
    int dart;  // dart into this node, -1 at the root
    int vertex;
    int depth;  // position of vertex on the full path
    Word word;
};

}  // namespace

BranchDistribution exact_branch_law(const SurfaceGraph& g, const ChainSpec& spec) {
    const int L = static_cast<int>(spec.prefix.size());
    std::vector<int> pre_v{spec.start};
    std::vector<Word> pre_w{g.identity()};
    for (int d : spec.prefix) {
        if (g.edges[d].tail != pre_v.back()) throw std::invalid_argument("prefix is not a path");
        pre_v.push_back(g.edges[d].head);
        pre_w.push_back(compose(pre_w.back(), g.edges[d].label));
    }
    if (std::set<int>(pre_v.begin(), pre_v.end()).size() != pre_v.size())
        throw std::invalid_argument("prefix is not self-avoiding");
    auto is_target = [&](int v) { return !spec.target.empty() && spec.target[v]; };

    BranchDistribution out;
    const int tip = pre_v.back();
    if (g.is_boundary(tip) || is_target(tip)) {
        out.branches.push_back({spec.prefix, 1.0, g.is_boundary(tip) ? BranchEnd::boundary : BranchEnd::target, -1});
        out.states = 0;
        return out;
    }

    std::vector<Node> nodes{{-1, -1, tip, L, pre_w.back()}};
    std::vector<Eigen::Triplet<double>> trans;  // (from, to, p)
    struct Terminal {
        int node, dart;
        BranchEnd end;
        int cycle_start;
    };
    std::vector<Terminal> terms;
    std::map<std::pair<int, int>, int> child;
    std::vector<int> path_v;
    std::vector<Word> path_w;
    std::vector<int> node_at;  // trie node per depth > L

    for (size_t s = 0; s < nodes.size(); ++s) {
        // Rebuild the full path of state s.
        node_at.assign(nodes[s].depth + 1, -1);
        path_v.assign(nodes[s].depth + 1, -1);
        path_w.assign(nodes[s].depth + 1, g.identity());
        for (int k = 0; k <= L; ++k) {
            path_v[k] = pre_v[k];
            path_w[k] = pre_w[k];
        }
        for (int c = static_cast<int>(s); c != -1; c = nodes[c].parent) {
            node_at[nodes[c].depth] = c;
            path_v[nodes[c].depth] = nodes[c].vertex;
            path_w[nodes[c].depth] = nodes[c].word;
        }
        const int u = nodes[s].vertex;
        for (int d : g.out_darts(u)) {
            const double p = g.q(d);
            const int w = g.edges[d].head;
            Word cur = compose(nodes[s].word, g.edges[d].label);
            if (g.is_boundary(w)) {
                terms.push_back({static_cast<int>(s), d, BranchEnd::boundary, -1});
                continue;
            }
            if (is_target(w)) {
                terms.push_back({static_cast<int>(s), d, BranchEnd::target, -1});
                continue;
            }
            int pos = -1;
            for (int k = 0; k <= nodes[s].depth; ++k)
                if (path_v[k] == w) {
                    pos = k;
                    break;
                }
            if (pos >= 0) {
                bool same = path_w[pos] == cur;
                if (!same && spec.nc_stop) {
                    terms.push_back({static_cast<int>(s), d, BranchEnd::nc_cycle, pos});
                    continue;
                }
                if (pos <= L && spec.absorb_prefix) {
                    terms.push_back({static_cast<int>(s), d, BranchEnd::prefix, pos});
                    continue;
                }
                if (pos < L) throw std::invalid_argument("walk erased into the prefix; use absorb_prefix");
                trans.emplace_back(static_cast<int>(s), node_at[pos], p);
                continue;
            }
            auto key = std::make_pair(static_cast<int>(s), d);
            auto it = child.find(key);
            int c;
            if (it == child.end()) {
                c = static_cast<int>(nodes.size());
                if (c >= spec.state_cap)
                    throw state_cap_exceeded("exact branch law: more than " + std::to_string(spec.state_cap) +
                                                 " path states from vertex " + std::to_string(spec.start),
                                             c);
                nodes.push_back({static_cast<int>(s), d, w, nodes[s].depth + 1, cur});
                child.emplace(key, c);
            } else {
                c = it->second;
            }
            trans.emplace_back(static_cast<int>(s), c, p);
        }
    }

    const int n = static_cast<int>(nodes.size());
    out.states = n;
    // Expected visits y solve y = e_root + T^t y.
    std::vector<Eigen::Triplet<double>> a;
    a.reserve(trans.size() + n);
    for (int i = 0; i < n; ++i) a.emplace_back(i, i, 1.0);
    for (auto& t : trans) a.emplace_back(t.col(), t.row(), -t.value());
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(a.begin(), a.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw std::runtime_error("exact branch law: singular system");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;
    Eigen::VectorXd y = lu.solve(rhs);

    for (auto& t : terms) {
        Branch b;
        std::vector<int> tail;
        for (int c = t.node; nodes[c].dart != -1; c = nodes[c].parent) tail.push_back(nodes[c].dart);
        b.darts = spec.prefix;
        b.darts.insert(b.darts.end(), tail.rbegin(), tail.rend());
        b.darts.push_back(t.dart);
        b.prob = y(t.node) * g.q(t.dart);
        b.end = t.end;
        b.cycle_start = t.end == BranchEnd::nc_cycle ? t.cycle_start : -1;
        if (t.end == BranchEnd::prefix) b.cycle_start = t.cycle_start;
        out.branches.push_back(std::move(b));
    }
    return out;
}

BranchDistribution exact_branch_law(const SurfaceGraph& g, int start, bool nc_stop, long long state_cap) {
    ChainSpec spec;
    spec.start = start;
    spec.nc_stop = nc_stop;
    spec.state_cap = state_cap;
    return exact_branch_law(g, spec);
}

PairDistribution exact_pair_law(const SurfaceGraph& g, int s1, int s2, PairMode mode, bool nc_stop, long long state_cap,
                                const std::function<bool(const Branch&)>& keep_first) {
    PairDistribution res;
    auto law1 = exact_branch_law(g, s1, nc_stop, state_cap);
    auto keep = [&](const Branch& b) { return !keep_first || keep_first(b); };
    if (mode == PairMode::independent) {
        auto law2 = exact_branch_law(g, s2, nc_stop, state_cap);
        for (auto& b1 : law1.branches) {
            if (!keep(b1)) continue;
            for (auto& b2 : law2.branches) res.entries.push_back({b1, b2, b1.prob * b2.prob});
        }
        return res;
    }
    // The second walk stops on the first branch; the disjointness event is
    // that it never does. Its mass needs every first branch, kept or not.
    const bool conditioned = mode == PairMode::conditioned_disjoint;
    double kept = 0;
    for (auto& b1 : law1.branches) {
        const bool store = keep(b1);
        if (!store && !conditioned) continue;
        ChainSpec spec;
        spec.start = s2;
        spec.nc_stop = nc_stop;
        spec.state_cap = state_cap;
        spec.target.assign(g.num_vertices(), 0);
        for (int v : b1.vertices(g, s1))
            if (!g.is_boundary(v)) spec.target[v] = 1;
        auto law2 = exact_branch_law(g, spec);
        for (auto& b2 : law2.branches) {
            if (conditioned && b2.end == BranchEnd::target) continue;
            kept += b1.prob * b2.prob;
            if (store) res.entries.push_back({b1, b2, b1.prob * b2.prob});
        }
    }
    if (conditioned) {
        if (!(kept > 0)) throw std::domain_error("disjointness event has probability zero");
        for (auto& e : res.entries) e.prob /= kept;
    }
    return res;
}

int CrsfTable::find(const std::vector<int>& out) const {
    for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].out == out) return static_cast<int>(i);
    return -1;
}

CrsfTable enumerate_crsf_distribution(const SurfaceGraph& g, long long cap) {
    const int V = g.num_vertices();
    std::vector<int> inner = g.interior_vertices();
    std::vector<int> out(V, -1);
    CrsfTable table;

    // Closing a cycle through v is the only way a new cycle can appear.
    auto closes_contractible = [&](int v) {
        std::vector<int> darts;
        int u = v;
        for (int steps = 0; steps <= V; ++steps) {
            int d = out[u];
            if (d < 0) return false;
            darts.push_back(d);
            u = g.edges[d].head;
            if (u == v) return loop_class(g, darts).is_identity();
        }
        return false;
    };
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == inner.size()) {
            if (static_cast<long long>(table.entries.size()) >= cap)
                throw state_cap_exceeded("CRSF enumeration exceeds " + std::to_string(cap) + " configurations", cap);
            CrsfEntry e;
            e.out = out;
            e.weight = 1;
            for (int v : inner) e.weight *= g.edges[out[v]].weight;
            CRSFSample s;
            s.out = out;
            annotate(g, s);
            e.K = s.K;
            e.K_dagger = s.K_dagger;
            e.temperleyan = !s.skeleton || is_temperleyan(g, *s.skeleton);
            table.entries.push_back(std::move(e));
            return;
        }
        int v = inner[i];
        for (int d : g.out_darts(v)) {
            out[v] = d;
            if (!closes_contractible(v)) rec(i + 1);
        }
        out[v] = -1;
    };
    rec(0);
    for (auto& e : table.entries) {
        table.Z_wwils += e.weight;
        if (e.temperleyan) {
            table.Z_wils += e.weight;
            table.Z_temp += e.weight * std::ldexp(1.0, e.K_dagger);
        }
    }
    for (auto& e : table.entries) {
        e.p_wwils = e.weight / table.Z_wwils;
        if (e.temperleyan) {
            e.p_wils = e.weight / table.Z_wils;
            e.p_temp = e.weight * std::ldexp(1.0, e.K_dagger) / table.Z_temp;
        }
    }
    return table;
}

}  // namespace crsf
