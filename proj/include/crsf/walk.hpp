#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "crsf/rng.hpp"
#include "crsf/surface.hpp"

namespace crsf {

struct step_cap_exceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Boundary vertices always stop the walk.
struct StopSpec {
    std::vector<char> target;  // per vertex; empty means no targets
    bool nc_cycle = false;

    bool is_target(int v) const { return !target.empty() && target[v]; }
    static StopSpec boundary() { return {}; }
    static StopSpec noncontractible() { return {{}, true}; }
};

enum class StopReason { boundary, target, nc_cycle };
const char* to_string(StopReason r);

struct ErasedLoop {
    int root = -1;
    std::vector<int> darts;
    double log_q = 0;
    Word cls;
};

struct WalkTrajectory {
    int start = -1;
    std::vector<int> darts;
    // Cumulative word after each step.
    std::vector<Word> words(const SurfaceGraph& g) const;
};

struct LerwResult {
    // Loop-erased path as darts from the start. For nc stops the closing dart
    // is last and the cycle is branch[cycle_start..].
    std::vector<int> branch;
    int cycle_start = -1;
    StopReason reason = StopReason::boundary;
    std::vector<ErasedLoop> erased;
    std::optional<WalkTrajectory> trajectory;
    long long steps = 0;

    std::vector<int> cycle() const;
    int end_vertex(const SurfaceGraph& g, int start) const;
};

// Picks an out-dart of v with probability proportional to its weight.
int step(const SurfaceGraph& g, int v, Rng& rng);

// Chronological loop erasure driven one dart at a time, so that a recorded
// trajectory can be replayed through exactly the same logic.
class LoopEraser {
public:
    LoopEraser(const SurfaceGraph& g, const StopSpec& stop, bool keep_loops);
    void reset(int start);
    // Returns true once the walk has stopped.
    bool push(int dart);
    int current() const { return path_v_.back(); }
    bool stopped() const { return stopped_; }
    LerwResult take();

private:
    const SurfaceGraph& g_;
    const StopSpec& stop_;
    bool keep_loops_;
    std::vector<int> pos_;
    std::vector<int> path_v_, path_d_;
    std::vector<Word> path_w_;
    Word cur_;
    bool stopped_ = false;
    LerwResult res_;
};

struct WalkOptions {
    bool record_trajectory = false;
    bool keep_loops = true;
    long long step_cap = 100'000'000;
};

LerwResult run_lerw(const SurfaceGraph& g, int start, const StopSpec& stop, Rng& rng, const WalkOptions& opt = {});

// Re-erases a recorded trajectory.
LerwResult replay_lerw(const SurfaceGraph& g, const WalkTrajectory& traj, const StopSpec& stop);

struct Estimate {
    double mean = 0, se = 0, lo = 0, hi = 0;
    long long n = 0;
};
Estimate mean_estimate(double sum, double sum_sq, long long n);

struct CrossingSpec {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // rectangle, in unfolded polygon coordinates
    double sx = 0, sy = 0, sr = 0;          // start ball
    double tx = 0, ty = 0, tr = 0;          // target ball
};

// Probability that the walk from the start ball reaches the target ball before
// leaving the rectangle or hitting the boundary.
Estimate crossing_probability_estimate(const SurfaceGraph& g, const CrossingSpec& spec, long long n, Rng& rng);

}  // namespace crsf
