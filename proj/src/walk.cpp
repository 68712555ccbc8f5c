#include "crsf/walk.hpp"

#include <cmath>

namespace crsf {

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::boundary: return "boundary";
        case StopReason::target: return "target";
        case StopReason::nc_cycle: return "nc-cycle";
    }
    return "?";
}

std::vector<Word> WalkTrajectory::words(const SurfaceGraph& g) const {
    std::vector<Word> out;
    out.reserve(darts.size());
    Word w = g.identity();
    for (int d : darts) {
        compose_into(w, g.edges[d].label);
        out.push_back(w);
    }
    return out;
}

std::vector<int> LerwResult::cycle() const {
    if (cycle_start < 0) return {};
    return {branch.begin() + cycle_start, branch.end()};
}

int LerwResult::end_vertex(const SurfaceGraph& g, int start) const {
    return branch.empty() ? start : g.edges[branch.back()].head;
}

int step(const SurfaceGraph& g, int v, Rng& rng) {
    if (g.is_boundary(v)) throw std::invalid_argument("step from boundary vertex " + std::to_string(v));
    const auto& outs = g.out_darts(v);
    double u = rng.uniform() * g.out_weight(v);
    for (int d : outs) {
        u -= g.edges[d].weight;
        if (u < 0) return d;
    }
    return outs.back();
}

LoopEraser::LoopEraser(const SurfaceGraph& g, const StopSpec& stop, bool keep_loops)
    : g_(g), stop_(stop), keep_loops_(keep_loops), pos_(g.num_vertices(), -1) {}

void LoopEraser::reset(int start) {
    for (int v : path_v_) pos_[v] = -1;
    path_v_.assign(1, start);
    path_d_.clear();
    cur_ = g_.identity();
    path_w_.assign(1, cur_);
    pos_[start] = 0;
    stopped_ = false;
    res_ = LerwResult{};
    if (g_.is_boundary(start)) throw std::invalid_argument("walk started on the boundary");
    if (stop_.is_target(start)) {
        stopped_ = true;
        res_.reason = StopReason::target;
    }
}

bool LoopEraser::push(int d) {
    if (stopped_) throw std::logic_error("push after stop");
    const Edge& e = g_.edges[d];
    if (e.tail != path_v_.back()) throw std::invalid_argument("dart does not continue the walk");
    ++res_.steps;
    compose_into(cur_, e.label);
    int w = e.head;
    if (g_.is_boundary(w) || stop_.is_target(w)) {
        path_d_.push_back(d);
        res_.reason = g_.is_boundary(w) ? StopReason::boundary : StopReason::target;
        stopped_ = true;
        return true;
    }
    int p = pos_[w];
    if (p < 0) {
        pos_[w] = static_cast<int>(path_v_.size());
        path_v_.push_back(w);
        path_d_.push_back(d);
        path_w_.push_back(cur_);
        return false;
    }
    bool contractible = path_w_[p] == cur_;
    if (!contractible && stop_.nc_cycle) {
        path_d_.push_back(d);
        res_.cycle_start = p;
        res_.reason = StopReason::nc_cycle;
        stopped_ = true;
        return true;
    }
    if (keep_loops_) {
        ErasedLoop loop;
        loop.root = w;
        loop.darts.assign(path_d_.begin() + p, path_d_.end());
        loop.darts.push_back(d);
        for (int x : loop.darts) loop.log_q += std::log(g_.q(x));
        loop.cls = contractible ? g_.identity() : compose(path_w_[p].inverse(), cur_);
        res_.erased.push_back(std::move(loop));
    }
    for (size_t i = p + 1; i < path_v_.size(); ++i) pos_[path_v_[i]] = -1;
    path_v_.resize(p + 1);
    path_d_.resize(p);
    path_w_.resize(p + 1);
    cur_ = path_w_[p];
    return false;
}

LerwResult LoopEraser::take() {
    res_.branch = path_d_;
    return std::move(res_);
}

LerwResult run_lerw(const SurfaceGraph& g, int start, const StopSpec& stop, Rng& rng, const WalkOptions& opt) {
    LoopEraser er(g, stop, opt.keep_loops);
    er.reset(start);
    WalkTrajectory traj{start, {}};
    long long n = 0;
    while (!er.stopped()) {
        if (++n > opt.step_cap)
            throw step_cap_exceeded("walk from " + std::to_string(start) + " exceeded " + std::to_string(opt.step_cap) +
                                    " steps at vertex " + std::to_string(er.current()));
        int d = step(g, er.current(), rng);
        if (opt.record_trajectory) traj.darts.push_back(d);
        er.push(d);
    }
    LerwResult r = er.take();
    if (opt.record_trajectory) r.trajectory = std::move(traj);
    return r;
}

LerwResult replay_lerw(const SurfaceGraph& g, const WalkTrajectory& traj, const StopSpec& stop) {
    LoopEraser er(g, stop, true);
    er.reset(traj.start);
    for (int d : traj.darts) {
        if (er.stopped()) throw std::invalid_argument("trajectory continues after the stopping time");
        er.push(d);
    }
    LerwResult r = er.take();
    r.trajectory = traj;
    return r;
}

Estimate mean_estimate(double sum, double sum_sq, long long n) {
    if (n <= 0) throw std::invalid_argument("estimate from zero samples");
    Estimate e;
    e.n = n;
    e.mean = sum / n;
    double var = n > 1 ? std::max(0.0, (sum_sq - n * e.mean * e.mean) / (n - 1)) : 0.0;
    e.se = std::sqrt(var / n);
    e.lo = e.mean - 1.96 * e.se;
    e.hi = e.mean + 1.96 * e.se;
    return e;
}


Estimate crossing_probability_estimate(const SurfaceGraph& g, const CrossingSpec& s, long long n, Rng& rng) {
    auto in_rect = [&](double x, double y) { return x >= s.x0 && x <= s.x1 && y >= s.y0 && y <= s.y1; };
    int start = -1, in_rectangle = 0;
    double best = 0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (g.is_boundary(v)) continue;
        double x = g.vertices[v].x, y = g.vertices[v].y;
        in_rectangle += in_rect(x, y);
        double dist = std::hypot(x - s.sx, y - s.sy);
        if (dist <= s.sr && in_rect(x, y) && (start < 0 || dist < best)) {
            start = v;
            best = dist;
        }
    }
    if (in_rectangle < 2) throw std::invalid_argument("crossing rectangle contains fewer than two vertices");
    if (start < 0) throw std::invalid_argument("no vertex in the start ball");
    if (n <= 0) throw std::invalid_argument("crossing estimate needs n > 0");
    long long hits = 0;
    for (long long k = 0; k < n; ++k) {
        int v = start;
        Word w = g.identity();
        for (long long t = 0;; ++t) {
            auto o = word_offset(g, w);
            double x = g.vertices[v].x + o[0], y = g.vertices[v].y + o[1];
            if (std::hypot(x - s.tx, y - s.ty) <= s.tr) {
                ++hits;
                break;
            }
            if (g.is_boundary(v) || !in_rect(x, y)) break;
            if (t > 100'000'000) throw step_cap_exceeded("crossing walk did not terminate");
            int d = step(g, v, rng);
            compose_into(w, g.edges[d].label);
            v = g.edges[d].head;
        }
    }
    return mean_estimate(static_cast<double>(hits), static_cast<double>(hits), n);
}

}  // namespace crsf
