#include "crsf/wilson.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "crsf/exactdist.hpp"
#include "crsf/parallel.hpp"

namespace crsf {

namespace {

struct Forest {
    const SurfaceGraph& g;
    StopSpec stop;
    std::vector<int> out;

    explicit Forest(const SurfaceGraph& graph) : g(graph), out(graph.num_vertices(), -1) {
        stop.target.assign(g.num_vertices(), 0);
        stop.nc_cycle = true;
    }
    bool covered(int v) const { return g.is_boundary(v) || stop.target[v]; }

    void grow(int v, Rng& rng, const WilsonOptions& opt, std::vector<WilsonBranch>* log) {
        if (covered(v)) return;
        WalkOptions wo;
        wo.record_trajectory = opt.record_trajectories;
        wo.keep_loops = opt.keep_loops;
        wo.step_cap = opt.step_cap;
        LerwResult r = run_lerw(g, v, stop, rng, wo);
        for (int d : r.branch) {
            out[g.edges[d].tail] = d;
            stop.target[g.edges[d].tail] = 1;
        }
        if (log) log->push_back({v, std::move(r)});
    }
    void complete(const std::vector<int>& order, Rng& rng, const WilsonOptions& opt, std::vector<WilsonBranch>* log) {
        for (int v : order) grow(v, rng, opt, log);
        for (int v = 0; v < g.num_vertices(); ++v) grow(v, rng, opt, log);
    }
};

}  // namespace

WilsonRun run_wilson(const SurfaceGraph& g, const std::vector<int>& order, Rng& rng, const WilsonOptions& opt) {
    Forest f(g);
    WilsonRun run;
    f.complete(order, rng, opt, &run.branches);
    run.sample.out = f.out;
    annotate(g, run.sample);
    return run;
}

CRSFSample sample_wired_crsf(const SurfaceGraph& g, const std::vector<int>& order, Rng& rng) {
    return run_wilson(g, order, rng).sample;
}

CRSFSample sample_temperleyan(const SurfaceGraph& g, Rng& rng, int max_attempts) {
    if (max_attempts < 1) throw std::invalid_argument("max_attempts must be positive");
    WilsonOptions opt;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        Forest f(g);
        for (auto& p : g.punctures) {
            f.grow(p.u, rng, opt, nullptr);
            f.grow(p.v, rng, opt, nullptr);
        }
        if (!g.punctures.empty() && !is_temperleyan(g, skeleton_of(g, f.out))) continue;
        f.complete({}, rng, opt, nullptr);
        CRSFSample s;
        s.out = f.out;
        annotate(g, s);
        s.attempts = attempt;
        return s;
    }
    throw acceptance_failure("no Temperleyan skeleton in " + std::to_string(max_attempts) + " attempts", 0.0);
}

PtempResult ptemp_estimate(const std::vector<CRSFSample>& samples, const std::function<double(const CRSFSample&)>& f) {
    if (samples.empty()) throw std::invalid_argument("ptemp_estimate: no samples");
    double sw = 0, sw2 = 0, swf = 0;
    for (auto& s : samples) {
        double w = std::ldexp(1.0, s.K_dagger);
        sw += w;
        sw2 += w * w;
        swf += w * f(s);
    }
    PtempResult r;
    r.estimate = swf / sw;
    r.ess = sw * sw / sw2;
    double v = 0;
    for (auto& s : samples) {
        double w = std::ldexp(1.0, s.K_dagger);
        double dev = f(s) - r.estimate;
        v += w * w * dev * dev;
    }
    r.se = std::sqrt(v) / sw;
    return r;
}

std::vector<int> good_algorithm_order(const SurfaceGraph& g, const std::vector<int>& H, double cx, double cy, double r,
                                      int j_max) {
    if (H.empty()) throw std::invalid_argument("good_algorithm_order: empty region");
    if (!(r > 0)) throw std::invalid_argument("good_algorithm_order: radius must be positive");
    std::vector<int> order;
    std::set<int> seen;
    for (int j = 1; j <= j_max; ++j) {
        const double s = std::ldexp(r, -j);
        const double side = r / 2 * std::pow(6.0, -j);
        std::map<std::pair<long long, long long>, int> pick;
        for (int v = 0; v < g.num_vertices(); ++v) {
            if (g.is_boundary(v)) continue;
            const auto& p = g.vertices[v];
            double best = INFINITY;
            for (int h : H) best = std::min(best, std::hypot(p.x - g.vertices[h].x, p.y - g.vertices[h].y));
            if (best > s) continue;
            auto cell = std::make_pair(static_cast<long long>(std::floor(p.y / side)),
                                       static_cast<long long>(std::floor(p.x / side)));
            auto it = pick.find(cell);
            double dv = std::hypot(p.x - cx, p.y - cy);
            if (it == pick.end()) {
                pick.emplace(cell, v);
                continue;
            }
            const auto& q = g.vertices[it->second];
            double dq = std::hypot(q.x - cx, q.y - cy);
            if (dv > dq || (dv == dq && v < it->second)) it->second = v;
        }
        for (auto& [cell, v] : pick)
            if (seen.insert(v).second) order.push_back(v);
    }
    return order;
}

std::vector<CRSFSample> sample_batch(const SurfaceGraph& g, Law law, long long n, std::uint64_t seed, int max_attempts) {
    std::vector<CRSFSample> out(n);
    parallel_for(n, [&](long long i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        out[i] = law == Law::wwils ? sample_wired_crsf(g, {}, rng) : sample_temperleyan(g, rng, max_attempts);
    });
    return out;
}

}  // namespace crsf
