#include "crsf/suites.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "crsf/exactdist.hpp"
#include "crsf/loopmeasure.hpp"
#include "crsf/pairchain.hpp"
#include "crsf/parallel.hpp"
#include "crsf/wilson.hpp"

namespace crsf {

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::vector<int> starts_of(const SurfaceGraph& g, const SuiteOptions& opt) {
    auto v = g.interior_vertices();
    if (opt.start_limit > 0 && static_cast<int>(v.size()) > opt.start_limit) v.resize(opt.start_limit);
    return v;
}

std::vector<int> vertices_of(const SurfaceGraph& g, const std::vector<int>& darts, int start) {
    std::vector<int> vs{start};
    for (int d : darts) vs.push_back(g.edges[d].head);
    return vs;
}

std::vector<char> mask(const SurfaceGraph& g, const std::vector<int>& vs) {
    std::vector<char> m(g.num_vertices(), 0);
    for (int v : vs)
        if (!g.is_boundary(v)) m[v] = 1;
    return m;
}

int central_vertex(const SurfaceGraph& g) {
    double cx = 0, cy = 0;
    auto in = g.interior_vertices();
    for (int v : in) cx += g.vertices[v].x, cy += g.vertices[v].y;
    cx /= static_cast<double>(in.size()), cy /= static_cast<double>(in.size());
    return nearest_vertex(g, cx, cy);
}

int interior_neighbour(const SurfaceGraph& g, int v) {
    int best = -1;
    for (int d : g.out_darts(v)) {
        int w = g.edges[d].head;
        if (!g.is_boundary(w) && w != v && (best < 0 || w < best)) best = w;
    }
    return best;
}

nlohmann::json bound(double value, double limit) { return {{"value", value}, {"bound", limit}}; }

// Every cycle of a partial out map is noncontractible.
bool partial_cycles_ok(const SurfaceGraph& g, const std::vector<int>& out) {
    const int V = g.num_vertices();
    std::vector<int> state(V, 0);  // 0 new, 1 on stack, 2 done
    for (int s = 0; s < V; ++s) {
        if (state[s] || out[s] < 0) continue;
        std::vector<int> stack;
        int v = s;
        while (v >= 0 && !g.is_boundary(v) && out[v] >= 0 && state[v] == 0) {
            state[v] = 1;
            stack.push_back(v);
            v = g.edges[out[v]].head;
        }
        if (v >= 0 && state[v] == 1) {
            std::vector<int> darts;
            int u = v;
            do {
                darts.push_back(out[u]);
                u = g.edges[out[u]].head;
            } while (u != v);
            if (loop_class(g, darts).is_identity()) return false;
        }
        for (int u : stack) state[u] = 2;
    }
    return true;
}

void fill_out(const SurfaceGraph& g, std::vector<int>& out, const std::vector<int>& darts) {
    for (int d : darts) out[g.edges[d].tail] = d;
}

}  // namespace

bool labels_trivial(const SurfaceGraph& g) {
    for (auto& e : g.edges)
        if (!e.label.is_identity()) return false;
    return true;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"density-exit", "density-surface", "pair-rn",    "marginals",
                                                "loop-soup",    "pairchain",       "temperleyan"};
    return names;
}

SuiteResult run_suite(const std::string& name, const SurfaceGraph& g, const SuiteOptions& opt) {
    if (name == "density-exit") return suite_density_exit(g, opt);
    if (name == "density-surface") return suite_density_surface(g, opt);
    if (name == "pair-rn") return suite_pair_rn(g, opt);
    if (name == "marginals") return suite_marginals(g, opt);
    if (name == "loop-soup") return suite_loop_soup(g, opt);
    if (name == "pairchain") return suite_pairchain(g, opt);
    if (name == "temperleyan") return suite_temperleyan(g, opt);
    throw std::invalid_argument("unknown suite '" + name + "'");
}

SuiteResult suite_density_exit(const SurfaceGraph& g, const SuiteOptions& opt) {
    SuiteResult r;
    r.name = "density-exit";
    const bool ok = labels_trivial(g) && !g.boundary_vertices().empty();
    r.check("graph is wired with only contractible loops", ok);
    if (!ok) return r;
    LoopMeasure lm(g, opt.state_cap);
    double worst = 0, worst_total = 0;
    long long branches = 0;
    auto starts = starts_of(g, opt);
    for (int v : starts) {
        auto law = exact_branch_law(g, v, false, opt.state_cap);
        worst_total = std::max(worst_total, std::abs(law.total() - 1));
        for (auto& b : law.branches) {
            if (b.prob <= opt.prob_floor) continue;
            worst = std::max(worst, rel_err(lm.density({b.darts}, KillMode::exit_only), b.prob));
            ++branches;
        }
    }
    r.stats = {{"starts", starts.size()}, {"branches", branches}, {"max_rel_error", worst}};
    r.check("branch density matches the exact law", worst <= opt.tol, bound(worst, opt.tol));
    r.check("exact law has total mass 1", worst_total <= opt.tol, bound(worst_total, opt.tol));
    return r;
}

SuiteResult suite_density_surface(const SurfaceGraph& g, const SuiteOptions& opt) {
    SuiteResult r;
    r.name = "density-surface";
    LoopMeasure lm(g, opt.state_cap);
    double worst = 0, worst_pair = 0, worst_total = 0;
    long long branches = 0, pairs = 0;
    auto starts = starts_of(g, opt);
    for (int v : starts) {
        auto law = exact_branch_law(g, v, true, opt.state_cap);
        worst_total = std::max(worst_total, std::abs(law.total() - 1));
        for (auto& b : law.branches) {
            if (b.prob <= opt.prob_floor) continue;
            worst = std::max(worst, rel_err(lm.density({b.darts}, KillMode::exit_or_nc), b.prob));
            ++branches;
        }
    }
    int done = 0;
    for (int v : starts) {
        if (done >= opt.pair_starts) break;
        int w = interior_neighbour(g, v);
        if (w < 0) continue;
        ++done;
        auto law = exact_pair_law(g, v, w, PairMode::wilson_sequential, true, opt.state_cap);
        worst_total = std::max(worst_total, std::abs(law.total() - 1));
        for (auto& e : law.entries) {
            if (e.prob <= opt.prob_floor) continue;
            worst_pair = std::max(worst_pair,
                                  rel_err(lm.density({e.first.darts, e.second.darts}, KillMode::exit_or_nc), e.prob));
            ++pairs;
        }
    }
    r.stats = {{"starts", starts.size()},   {"branches", branches},
               {"start_pairs", done},       {"pairs", pairs},
               {"max_rel_error", worst},    {"max_rel_error_pairs", worst_pair}};
    r.check("single-branch density matches the exact law", worst <= opt.tol, bound(worst, opt.tol));
    r.check("sequential two-branch density matches the exact law", worst_pair <= opt.tol, bound(worst_pair, opt.tol));
    r.check("exact laws have total mass 1", worst_total <= opt.tol, bound(worst_total, opt.tol));
    return r;
}

SuiteResult suite_pair_rn(const SurfaceGraph& g, const SuiteOptions& opt) {
    SuiteResult r;
    r.name = "pair-rn";
    const bool ok = labels_trivial(g) && !g.boundary_vertices().empty();
    r.check("graph is wired with only contractible loops", ok);
    if (!ok) return r;
    const int s1 = central_vertex(g), s2 = interior_neighbour(g, s1);
    if (s2 < 0) {
        r.check("start has an interior neighbour", false);
        return r;
    }
    LoopMeasure lm(g, opt.state_cap);
    auto dom = DomainSpec::interior(g, KillMode::exit_only);
    const size_t len = static_cast<size_t>(opt.short_len);
    auto joint = exact_pair_law(g, s1, s2, PairMode::wilson_sequential, false, opt.state_cap,
                                [len](const Branch& b) { return b.darts.size() <= len; });
    std::map<std::vector<int>, double> p1, p2;
    for (auto& b : exact_branch_law(g, s1, false, opt.state_cap).branches) p1[b.darts] = b.prob;
    for (auto& b : exact_branch_law(g, s2, false, opt.state_cap).branches) p2[b.darts] = b.prob;
    double worst = 0;
    long long n = 0;
    for (auto& e : joint.entries) {
        if (e.second.end != BranchEnd::boundary || e.prob <= opt.prob_floor) continue;
        double factor = lm.pair_rn_factor(path_tails(g, e.first.darts), path_tails(g, e.second.darts), dom);
        double rhs = std::exp(-factor) * p1.at(e.first.darts) * p2.at(e.second.darts);
        worst = std::max(worst, rel_err(rhs, e.prob));
        ++n;
    }
    r.stats = {{"start1", s1}, {"start2", s2}, {"first_length_max", opt.short_len}, {"pairs", n},
               {"max_rel_error", worst}};
    r.check("disjoint pairs were found", n > 0);
    r.check("joint law equals the loop-weighted product law", worst <= opt.tol, bound(worst, opt.tol));
    return r;
}

namespace {

void planar_marginals(const SurfaceGraph& g, const SuiteOptions& opt, LoopMeasure& lm, SuiteResult& r) {
    PlanarMarginals pm{lm};
    double w_pre = 0, w_suf = 0, w_ps = 0, w_cond = 0;
    long long n_pre = 0, n_suf = 0, n_ps = 0, n_cond = 0;
    for (int x0 : starts_of(g, opt)) {
        auto law = exact_branch_law(g, x0, false, opt.state_cap);
        std::map<std::vector<int>, double> pre, suf;
        for (auto& b : law.branches)
            for (size_t k = 0; k <= b.darts.size(); ++k) {
                pre[std::vector<int>(b.darts.begin(), b.darts.begin() + static_cast<long>(k))] += b.prob;
                if (k < b.darts.size())
                    suf[std::vector<int>(b.darts.begin() + static_cast<long>(k), b.darts.end())] += b.prob;
            }
        for (auto& [eta, p] : pre) {
            if (p <= opt.prob_floor) continue;
            w_pre = std::max(w_pre, rel_err(pm.prefix(eta, x0), p));
            ++n_pre;
        }
        for (auto& [eta, p] : suf) {
            if (p <= opt.prob_floor) continue;
            w_suf = std::max(w_suf, rel_err(pm.suffix(eta, x0, g.edges[eta.front()].tail), p));
            ++n_suf;
        }
        int ps_done = 0;
        for (auto& b : law.branches) {
            const size_t L = b.darts.size();
            if (b.prob <= opt.prob_floor || L < 3 || ps_done >= 64) continue;
            const size_t k1 = L / 3, k2 = L - L / 3;
            std::vector<int> minus(b.darts.begin(), b.darts.begin() + static_cast<long>(k1));
            std::vector<int> plus(b.darts.begin() + static_cast<long>(k2), b.darts.end());
            double want = 0;
            for (auto& c : law.branches)
                if (c.darts.size() >= minus.size() + plus.size() &&
                    std::equal(minus.begin(), minus.end(), c.darts.begin()) &&
                    std::equal(plus.rbegin(), plus.rend(), c.darts.rbegin()))
                    want += c.prob;
            w_ps = std::max(w_ps, rel_err(pm.prefix_suffix(minus, plus, x0, g.edges[plus.front()].tail), want));
            ++n_ps, ++ps_done;
        }
        for (auto& b : law.branches) {
            if (b.prob <= opt.prob_floor) continue;
            for (size_t k = 0; k < b.darts.size(); ++k) {
                double denom = pre[std::vector<int>(b.darts.begin(), b.darts.begin() + static_cast<long>(k))];
                w_cond = std::max(w_cond, rel_err(pm.conditional(b.darts, k, x0), b.prob / denom));
                ++n_cond;
            }
        }
    }
    r.stats["planar"] = {{"prefix", {{"count", n_pre}, {"max_rel_error", w_pre}}},
                         {"suffix", {{"count", n_suf}, {"max_rel_error", w_suf}}},
                         {"prefix_suffix", {{"count", n_ps}, {"max_rel_error", w_ps}}},
                         {"conditional", {{"count", n_cond}, {"max_rel_error", w_cond}}}};
    r.check("prefix marginal", w_pre <= opt.tol, bound(w_pre, opt.tol));
    r.check("suffix marginal", w_suf <= opt.tol, bound(w_suf, opt.tol));
    r.check("prefix and suffix marginal", w_ps <= opt.tol, bound(w_ps, opt.tol));
    r.check("conditional law given a prefix", w_cond <= opt.tol, bound(w_cond, opt.tol));
}

void surface_marginals(const SurfaceGraph& g, const SuiteOptions& opt, LoopMeasure& lm, SuiteResult& r) {
    SurfaceMarginals sm{lm};
    double w_pre = 0, w_cond = 0;
    long long n_pre = 0, n_cond = 0;
    for (int z : starts_of(g, opt)) {
        auto law = exact_branch_law(g, z, true, opt.state_cap);
        std::map<std::vector<int>, double> pre;
        auto max_k = [](const Branch& b) { return b.end == BranchEnd::nc_cycle ? b.darts.size() - 1 : b.darts.size(); };
        for (auto& b : law.branches)
            for (size_t k = 0; k <= max_k(b); ++k)
                pre[std::vector<int>(b.darts.begin(), b.darts.begin() + static_cast<long>(k))] += b.prob;
        for (auto& [eta, p] : pre) {
            if (p <= opt.prob_floor) continue;
            w_pre = std::max(w_pre, rel_err(sm.prefix(eta, z), p));
            ++n_pre;
        }
        for (auto& b : law.branches) {
            if (b.prob <= opt.prob_floor) continue;
            for (size_t k = 0; k < max_k(b); ++k) {
                double denom = pre[std::vector<int>(b.darts.begin(), b.darts.begin() + static_cast<long>(k))];
                w_cond = std::max(w_cond, rel_err(sm.conditional(b.darts, k, z), b.prob / denom));
                ++n_cond;
            }
        }
    }
    r.stats["surface"] = {{"prefix", {{"count", n_pre}, {"max_rel_error", w_pre}}},
                          {"conditional", {{"count", n_cond}, {"max_rel_error", w_cond}}}};
    r.check("surface prefix marginal", w_pre <= opt.tol, bound(w_pre, opt.tol));
    r.check("surface conditional law given a prefix", w_cond <= opt.tol, bound(w_cond, opt.tol));
}

// Skeleton marginal given the Temperleyan event against the compatible-
// continuation formula, within the band from contractible loops with
// noncontractible support.
void skeleton_band(const SurfaceGraph& g, const SuiteOptions& opt, LoopMeasure& lm, SuiteResult& r) {
    if (g.punctures.size() != 1) {
        r.stats["skeleton_band"] = "skipped: needs exactly one puncture";
        return;
    }
    const int u = g.punctures[0].u, v = g.punctures[0].v;
    auto joint = exact_pair_law(g, u, v, PairMode::wilson_sequential, true, opt.state_cap);
    double PA = 0;
    std::map<std::pair<std::vector<int>, std::vector<int>>, double> lhs;
    for (auto& e : joint.entries) {
        std::vector<int> out(g.num_vertices(), -1);
        fill_out(g, out, e.first.darts);
        fill_out(g, out, e.second.darts);
        auto sk = skeleton_of(g, out);
        if (!is_temperleyan(g, sk)) continue;
        PA += e.prob;
        for (size_t k1 = 1; k1 <= 2; ++k1)
            for (size_t k2 = 1; k2 <= 2; ++k2) {
                const auto &b1 = sk.branches[0], &b2 = sk.branches[1];
                if (b1.size() < k1 || b2.size() < k2) continue;
                std::vector<int> e1(b1.begin(), b1.begin() + static_cast<long>(k1));
                std::vector<int> e2(b2.begin(), b2.begin() + static_cast<long>(k2));
                auto v1 = vertices_of(g, e1, u), v2 = vertices_of(g, e2, v);
                std::set<int> all(v1.begin(), v1.end());
                bool ok = all.size() == v1.size();
                for (int x : v2) ok = ok && all.insert(x).second;
                for (int x : all) ok = ok && !g.is_boundary(x);
                if (ok) lhs[{e1, e2}] += e.prob;
            }
    }
    // The most likely pairs, taken round-robin over the four length classes.
    std::map<std::pair<size_t, size_t>, std::vector<std::pair<double, std::pair<std::vector<int>, std::vector<int>>>>> by_len;
    for (auto& [k, p] : lhs) by_len[{k.first.size(), k.second.size()}].push_back({p, k});
    for (auto& [len, v] : by_len)
        std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.first > b.first; });
    std::vector<std::pair<double, std::pair<std::vector<int>, std::vector<int>>>> picks;
    for (size_t round = 0; static_cast<int>(picks.size()) < opt.band_pairs; ++round) {
        bool any = false;
        for (auto& [len, v] : by_len)
            if (round < v.size() && static_cast<int>(picks.size()) < opt.band_pairs) {
                picks.push_back(v[round]);
                any = true;
            }
        if (!any) break;
    }

    const double width = nc_support_mass(g, opt.band_L) + long_loop_mass(g, opt.band_L);
    auto dom = DomainSpec::interior(g, KillMode::exit_or_nc);
    double worst = 0;
    auto rows = nlohmann::json::array();
    for (auto& [p, key] : picks) {
        const auto& [e1, e2] = key;
        auto v1 = vertices_of(g, e1, u), v2 = vertices_of(g, e2, v);
        std::vector<int> both = e1;
        both.insert(both.end(), e2.begin(), e2.end());
        double head = std::exp(log_q(g, both) + lm.log_mass_intersecting({v1, v2}, dom));
        ChainSpec c1;
        c1.start = u;
        c1.prefix = e1;
        c1.target = mask(g, v2);
        c1.nc_stop = true;
        c1.absorb_prefix = true;
        c1.state_cap = opt.state_cap;
        double compatible = 0;
        for (auto& b1 : exact_branch_law(g, c1).branches) {
            if (b1.end == BranchEnd::prefix) continue;
            ChainSpec c2 = c1;
            c2.start = v;
            c2.prefix = e2;
            c2.target = mask(g, vertices_of(g, b1.darts, u));
            for (int x : v2) c2.target[x] = 0;  // its own prefix is handled by absorption
            for (auto& b2 : exact_branch_law(g, c2).branches) {
                if (b2.end == BranchEnd::prefix) continue;
                std::vector<int> out(g.num_vertices(), -1);
                fill_out(g, out, b1.darts);
                fill_out(g, out, b2.darts);
                if (!partial_cycles_ok(g, out) || !is_temperleyan(g, skeleton_of(g, out))) continue;
                compatible += b1.prob * b2.prob;
            }
        }
        double want = p / PA, got = head * compatible / PA;
        double gap = std::abs(std::log(got) - std::log(want));
        worst = std::max(worst, gap);
        rows.push_back({{"len1", e1.size()}, {"len2", e2.size()}, {"exact", want}, {"formula", got}, {"log_gap", gap}});
    }
    r.stats["skeleton_band"] = {{"P_temperleyan", PA}, {"log_width", width}, {"pairs", rows}, {"max_log_gap", worst}};
    r.check("skeleton pairs were evaluated", !rows.empty());
    r.check("skeleton marginal lies in the band", worst <= width, bound(worst, width));
}

}  // namespace

SuiteResult suite_marginals(const SurfaceGraph& g, const SuiteOptions& opt) {
    SuiteResult r;
    r.name = "marginals";
    LoopMeasure lm(g, opt.state_cap);
    if (labels_trivial(g)) {
        if (g.boundary_vertices().empty()) {
            r.check("graph has a wired boundary", false);
            return r;
        }
        planar_marginals(g, opt, lm, r);
    } else {
        surface_marginals(g, opt, lm, r);
        skeleton_band(g, opt, lm, r);
    }
    return r;
}

SuiteResult suite_loop_soup(const SurfaceGraph& g, const SuiteOptions& opt) {
    SuiteResult r;
    r.name = "loop-soup";
    const bool ok = labels_trivial(g) && !g.boundary_vertices().empty();
    r.check("graph is wired with only contractible loops", ok);
    if (!ok) return r;
    auto test = g.interior_vertices();
    const int T = static_cast<int>(test.size());
    std::vector<int> slot(g.num_vertices(), -1);
    for (int i = 0; i < T; ++i) slot[test[i]] = i;
    const long long n = opt.samples;
    std::vector<std::uint16_t> counts(static_cast<size_t>(n) * T, 0);
    parallel_for(n, [&](long long i) {
        Rng rng(opt.seed, static_cast<std::uint64_t>(i));
        WilsonOptions wo;
        wo.record_trajectories = true;
        auto run = run_wilson(g, {}, rng, wo);
        auto* row = &counts[static_cast<size_t>(i) * T];
        for (auto& br : run.branches) {
            for (auto& loop : soup_from_trajectory(g, *br.walk.trajectory, br.walk.branch, rng)) {
                std::set<int> seen;
                for (int d : loop.darts) seen.insert(g.edges[d].tail);
                for (int x : seen)
                    if (slot[x] >= 0) ++row[slot[x]];
            }
        }
    });
    LoopMeasure lm(g, opt.state_cap);
    auto dom = DomainSpec::interior(g, KillMode::exit_only);
    double worst_z = 0, disp_lo = INFINITY, disp_hi = -INFINITY;
    auto rows = nlohmann::json::array();
    for (int t = 0; t < T; ++t) {
        double s = 0, s2 = 0;
        for (long long i = 0; i < n; ++i) {
            double c = counts[static_cast<size_t>(i) * T + t];
            s += c, s2 += c * c;
        }
        auto est = mean_estimate(s, s2, n);
        double want = std::log(lm.g_value(dom, test[t]));
        double z = est.se > 0 ? std::abs(est.mean - want) / est.se : (est.mean == want ? 0 : INFINITY);
        double var = n > 1 ? (s2 - n * est.mean * est.mean) / (n - 1) : 0;
        double disp = est.mean > 0 ? var / est.mean : 1;
        worst_z = std::max(worst_z, z);
        disp_lo = std::min(disp_lo, disp), disp_hi = std::max(disp_hi, disp);
        rows.push_back({{"vertex", test[t]}, {"mean", est.mean}, {"se", est.se}, {"log_g", want}, {"z", z},
                        {"dispersion", disp}});
    }
    r.stats = {{"runs", n}, {"vertices", rows}, {"max_z", worst_z}, {"dispersion_min", disp_lo},
               {"dispersion_max", disp_hi}};
    r.check("mean loop count through each vertex matches log g", worst_z <= opt.z_soup, bound(worst_z, opt.z_soup));
    r.check("loop counts have Poisson dispersion", disp_lo >= 0.9 && disp_hi <= 1.1,
            {{"min", disp_lo}, {"max", disp_hi}, {"range", {0.9, 1.1}}});
    return r;
}

SuiteResult suite_pairchain(const SurfaceGraph& g, const SuiteOptions& opt) {
    SuiteResult r;
    r.name = "pairchain";
    const bool ok = labels_trivial(g) && !g.boundary_vertices().empty();
    r.check("graph is wired with only contractible loops", ok);
    if (!ok) return r;
    ScaleSystem s;
    s.ox = opt.origin_x, s.oy = opt.origin_y, s.delta = opt.delta, s.N = opt.scales;
    s.x1 = nearest_vertex(g, s.ox - s.delta, s.oy - s.delta);
    s.x2 = nearest_vertex(g, s.ox + s.delta, s.oy - s.delta);
    PairChain pc(g, s, opt.state_cap);
    auto law = exact_pair_law(g, s.x1, s.x2, PairMode::conditioned_disjoint, false, opt.state_cap);

    // Conditional law of the level-(m+1) head given the level-m head.
    std::vector<std::map<std::pair<std::vector<int>, std::vector<int>>, double>> head(s.N + 1);
    for (auto& e : law.entries) {
        PathPair full{e.first.darts, e.second.darts};
        for (int m = 1; m <= s.N; ++m) {
            auto h = decompose(g, s, full, m, m).head;
            head[m][{h.first, h.second}] += e.prob;
        }
    }
    const double ZN = pc.Z(s.N);
    double w_norm = 0;
    for (auto& [k, p] : head[s.N]) w_norm = std::max(w_norm, rel_err(pc.lambda({k.first, k.second}, s.N) / ZN, p));
    double w_trans = 0, w_sum = 0;
    long long transitions = 0;
    for (int m = 1; m < s.N; ++m)
        for (auto& [k, p] : head[m]) {
            PathPair pm{k.first, k.second};
            double sum = 0;
            for (auto& next : pc.extensions(pm, m + 1)) {
                double t = pc.transition_prob(pm, next, m);
                auto it = head[m + 1].find({next.first, next.second});
                double want = it == head[m + 1].end() ? 0 : it->second / p;
                w_trans = std::max(w_trans, want > 0 ? rel_err(t, want) : std::abs(t));
                sum += t;
                ++transitions;
            }
            w_sum = std::max(w_sum, std::abs(sum - 1));
        }
    auto zs = nlohmann::json::array();
    bool decreasing = true;
    double prev = INFINITY;
    for (int n = 1; n <= s.N; ++n) {
        double z = pc.Z(n);
        zs.push_back(z);
        decreasing = decreasing && z <= prev;
        prev = z;
    }
    r.stats = {{"x1", s.x1}, {"x2", s.x2}, {"scales", s.N}, {"transitions", transitions},
               {"max_rel_error_normalised", w_norm}, {"max_rel_error_transition", w_trans},
               {"max_sum_error", w_sum}, {"Z", zs}};
    r.check("normalised lambda_N is the conditioned pair law", w_norm <= opt.tol, bound(w_norm, opt.tol));
    r.check("transition law equals the conditional law", w_trans <= opt.tol, bound(w_trans, opt.tol));
    r.check("transitions sum to one", w_sum <= opt.tol, bound(w_sum, opt.tol));
    r.check("Z(lambda_n) is nonincreasing", decreasing, {{"Z", zs}});
    return r;
}

namespace {

std::string class_key(const Word& w) {
    std::string a = to_string(cyclic_normal_form(w)), b = to_string(cyclic_normal_form(w.inverse()));
    return std::min(a, b);
}

struct TableCheck {
    double worst_z = 0;
    long long unknown = 0;
};

TableCheck compare_table(const CrsfTable& table, Law law, const std::vector<CRSFSample>& samples) {
    std::map<std::vector<int>, long long> count;
    for (auto& s : samples) ++count[s.out];
    TableCheck c;
    const double n = static_cast<double>(samples.size());
    long long matched = 0;
    for (auto& e : table.entries) {
        double p = e.prob(law);
        auto it = count.find(e.out);
        double k = it == count.end() ? 0 : static_cast<double>(it->second);
        if (it != count.end()) matched += it->second;
        if (p <= 0) {
            if (k > 0) c.worst_z = INFINITY;
            continue;
        }
        double sd = std::sqrt(n * p * (1 - p));
        if (sd > 0) c.worst_z = std::max(c.worst_z, std::abs(k - n * p) / sd);
    }
    c.unknown = static_cast<long long>(samples.size()) - matched;
    return c;
}

}  // namespace

SuiteResult suite_temperleyan(const SurfaceGraph& g, const SuiteOptions& opt) {
    SuiteResult r;
    r.name = "temperleyan";
    const long long n = opt.samples;
    auto wils = sample_batch(g, Law::wils, n, opt.seed);
    long long attempts = 0, bad_crsf = 0, not_temp = 0, bad_cycles = 0;
    for (auto& s : wils) {
        attempts += s.attempts;
        try {
            check_crsf(g, s.out);
        } catch (const std::exception&) {
            ++bad_crsf;
        }
        if (!g.punctures.empty() && !is_temperleyan(g, skeleton_of(g, s.out))) ++not_temp;
        std::set<int> seen;
        bool ok = true;
        for (auto& c : s.cycles) {
            ok = ok && is_primitive(c.cls) && same_class_up_to_sign(c.cls, s.cycles.front().cls);
            for (int d : c.darts) ok = ok && seen.insert(g.edges[d].tail).second;
        }
        if (!ok) ++bad_cycles;
    }
    const double rate = static_cast<double>(n) / static_cast<double>(attempts);
    r.stats = {{"samples", n}, {"acceptance_rate", rate}, {"mean_attempts", 1 / rate}};
    r.check("every sample is a CRSF", bad_crsf == 0, {{"failures", bad_crsf}});
    r.check("every sample is Temperleyan", not_temp == 0, {{"failures", not_temp}});
    if (g.punctures.empty()) r.check("acceptance rate is 1 without punctures", rate == 1.0, bound(rate, 1.0));
    if (g.spec.group_kind() == GroupKind::torus_z2)
        r.check("cycles are disjoint with one primitive class up to sign", bad_cycles == 0, {{"failures", bad_cycles}});

    CrsfTable table;
    try {
        table = enumerate_crsf_distribution(g, opt.enum_cap);
    } catch (const state_cap_exceeded& e) {
        r.stats["exact_table"] = std::string("skipped: ") + e.what();
        return r;
    }
    auto wwils = sample_batch(g, Law::wwils, n, opt.seed + 1);
    r.stats["exact_table"] = {{"configurations", table.entries.size()}};
    if (table.entries.size() <= 2000) {
        auto cw = compare_table(table, Law::wwils, wwils), ct = compare_table(table, Law::wils, wils);
        r.stats["exact_table"]["max_z_wwils"] = cw.worst_z;
        r.stats["exact_table"]["max_z_wils"] = ct.worst_z;
        r.check("wired law frequencies match the table", cw.unknown == 0 && cw.worst_z <= opt.z_freq,
                bound(cw.worst_z, opt.z_freq));
        r.check("Temperleyan law frequencies match the table", ct.unknown == 0 && ct.worst_z <= opt.z_freq,
                bound(ct.worst_z, opt.z_freq));
    }
    // K histograms, any table size.
    int kmax = 0;
    for (auto& e : table.entries) kmax = std::max(kmax, e.K);
    double worst_k = 0;
    for (auto [law, batch] : {std::pair{Law::wwils, &wwils}, std::pair{Law::wils, &wils}})
        for (int k = 0; k <= kmax; ++k) {
            double p = 0, c = 0;
            for (auto& e : table.entries)
                if (e.K == k) p += e.prob(law);
            for (auto& s : *batch) c += s.K == k;
            double sd = std::sqrt(n * p * (1 - p));
            if (sd > 0) worst_k = std::max(worst_k, std::abs(c - n * p) / sd);
        }
    r.stats["exact_table"]["max_z_K"] = worst_k;
    r.check("K distribution matches the table", worst_k <= opt.z_freq, bound(worst_k, opt.z_freq));
    // Reweighted estimates of two functionals under the 2^{K dagger} law.
    auto rows = nlohmann::json::array();
    double worst_p = 0;
    const int kmin = [&] {
        int m = kmax;
        for (auto& e : table.entries)
            if (e.p_temp > 0) m = std::min(m, e.K);
        return m;
    }();
    std::vector<std::pair<std::string, std::function<double(int, int)>>> fs{
        {"K", [](int K, int) { return static_cast<double>(K); }},
        {"K=min", [kmin](int K, int) { return K == kmin ? 1.0 : 0.0; }}};
    for (auto& [name, f] : fs) {
        double exact = 0;
        for (auto& e : table.entries) exact += e.p_temp * f(e.K, e.K_dagger);
        auto est = ptemp_estimate(wils, [&](const CRSFSample& s) { return f(s.K, s.K_dagger); });
        double z = est.se > 0 ? std::abs(est.estimate - exact) / est.se : (est.estimate == exact ? 0 : INFINITY);
        worst_p = std::max(worst_p, z);
        rows.push_back({{"f", name}, {"exact", exact}, {"estimate", est.estimate}, {"se", est.se}, {"ess", est.ess}, {"z", z}});
    }
    r.stats["ptemp"] = rows;
    r.check("reweighted estimates match the exact table", worst_p <= opt.z_ptemp, bound(worst_p, opt.z_ptemp));
    return r;
}

nlohmann::json run_stats(const std::string& metric, const SurfaceGraph& g, const StatsOptions& opt) {
    if (opt.n <= 0) throw std::invalid_argument("stats needs n > 0");
    nlohmann::json out = {{"metric", metric}, {"n", opt.n}, {"seed", opt.seed}, {"graph_hash", graph_hash(g)}};
    if (metric == "crossing") {
        if (!opt.has_crossing) throw std::invalid_argument("crossing needs --rect, --start and --target");
        Rng rng(opt.seed, 0);
        auto e = crossing_probability_estimate(g, opt.crossing, opt.n, rng);
        out["estimate"] = {{"mean", e.mean}, {"se", e.se}, {"lo", e.lo}, {"hi", e.hi}};
        return out;
    }
    Law law;
    if (opt.law == "wwils") law = Law::wwils;
    else if (opt.law == "wils") law = Law::wils;
    else if (opt.law == "temp") law = Law::temp;
    else throw std::invalid_argument("unknown law '" + opt.law + "'");
    out["law"] = opt.law;
    auto samples = sample_batch(g, law, opt.n, opt.seed, opt.max_attempts);
    // Under temp the draws are Temperleyan and carry weights 2^{K dagger}.
    auto estimate = [&](const std::function<double(const CRSFSample&)>& f) -> nlohmann::json {
        if (law == Law::temp) {
            auto p = ptemp_estimate(samples, f);
            return {{"mean", p.estimate}, {"se", p.se}, {"lo", p.estimate - 1.96 * p.se},
                    {"hi", p.estimate + 1.96 * p.se}, {"ess", p.ess}};
        }
        double s = 0, s2 = 0;
        for (auto& x : samples) {
            double v = f(x);
            s += v, s2 += v * v;
        }
        auto e = mean_estimate(s, s2, opt.n);
        return {{"mean", e.mean}, {"se", e.se}, {"lo", e.lo}, {"hi", e.hi}};
    };
    if (metric == "K-tail") {
        int kmax = 0;
        for (auto& s : samples) kmax = std::max(kmax, s.K);
        auto rows = nlohmann::json::array();
        bool decreasing = true;
        double prev = INFINITY;
        for (int k = 0; k <= kmax; ++k) {
            auto e = estimate([k](const CRSFSample& s) { return s.K > k ? 1.0 : 0.0; });
            double p = e["mean"];
            if (p > 0) decreasing = decreasing && p < prev;
            prev = p;
            e["k"] = k;
            rows.push_back(e);
        }
        out["tail"] = rows;
        out["strictly_decreasing"] = decreasing;
    } else if (metric == "qK-moment") {
        const double q = opt.q;
        out["q"] = q;
        out["estimate"] = estimate([q](const CRSFSample& s) { return std::pow(q, s.K); });
    } else if (metric == "cycle-classes") {
        std::map<std::string, long long> cycles;
        for (auto& s : samples)
            for (auto& c : s.cycles) ++cycles[class_key(c.cls)];
        auto rows = nlohmann::json::array();
        for (auto& [k, c] : cycles) {
            std::string key = k;
            rows.push_back({{"class", k}, {"cycles", c},
                            {"samples_with", estimate([&](const CRSFSample& s) {
                                 for (auto& cy : s.cycles)
                                     if (class_key(cy.cls) == key) return 1.0;
                                 return 0.0;
                             })}});
        }
        out["classes"] = rows;
    } else {
        throw std::invalid_argument("unknown metric '" + metric + "'");
    }
    return out;
}

}  // namespace crsf
