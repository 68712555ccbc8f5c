#include "crsf/loopmeasure.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

namespace crsf {

DomainSpec DomainSpec::interior(const SurfaceGraph& g, KillMode mode) {
    DomainSpec d;
    d.mode = mode;
    d.allowed.assign(g.num_vertices(), 0);
    for (int v = 0; v < g.num_vertices(); ++v) d.allowed[v] = !g.is_boundary(v);
    return d;
}

DomainSpec DomainSpec::without(const std::vector<int>& vertices) const {
    DomainSpec d = *this;
    for (int v : vertices) d.allowed[v] = 0;
    return d;
}

double log_q(const SurfaceGraph& g, const std::vector<int>& darts) {
    double s = 0;
    for (int d : darts) s += std::log(g.q(d));
    return s;
}

double loop_log_mass(const SurfaceGraph& g, const std::vector<int>& darts) {
    if (darts.empty()) throw std::invalid_argument("loop of length zero has no mass");
    loop_class(g, darts);
    return log_q(g, darts) - std::log(static_cast<double>(darts.size()));
}

double unrooted_log_mass(const SurfaceGraph& g, const std::vector<int>& darts) {
    double rooted = loop_log_mass(g, darts);
    const size_t n = darts.size();
    size_t period = n;
    for (size_t p = 1; p < n; ++p) {
        if (n % p) continue;
        bool ok = true;
        for (size_t i = 0; ok && i < n; ++i) ok = darts[i] == darts[(i + p) % n];
        if (ok) {
            period = p;
            break;
        }
    }
    return rooted + std::log(static_cast<double>(period));
}

std::vector<int> path_tails(const SurfaceGraph& g, const std::vector<int>& darts) {
    std::vector<int> vs;
    vs.reserve(darts.size());
    for (int d : darts) vs.push_back(g.edges[d].tail);
    return vs;
}

double hit_probability(const SurfaceGraph& g, int start, const std::vector<char>& stop, const std::vector<char>& good,
                       bool strict) {
    const int V = g.num_vertices();
    auto stopped = [&](int v) { return g.is_boundary(v) || stop[v]; };
    if (!strict && stopped(start)) return good[start] ? 1.0 : 0.0;
    std::vector<int> idx(V, -1);
    int n = 0;
    for (int v = 0; v < V; ++v)
        if (!stopped(v)) idx[v] = n++;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int v = 0; v < V; ++v) {
        if (idx[v] < 0) continue;
        for (int d : g.out_darts(v)) {
            int w = g.edges[d].head;
            if (idx[w] >= 0)
                A(idx[v], idx[w]) -= g.q(d);
            else if (good[w])
                b(idx[v]) += g.q(d);
        }
    }
    Eigen::VectorXd h = n ? Eigen::VectorXd(A.partialPivLu().solve(b)) : Eigen::VectorXd();
    auto val = [&](int w) { return idx[w] >= 0 ? h(idx[w]) : (good[w] ? 1.0 : 0.0); };
    if (!strict) return val(start);
    double p = 0;
    for (int d : g.out_darts(start)) p += g.q(d) * val(g.edges[d].head);
    return p;
}

namespace {

std::string cache_key(const DomainSpec& d, int x, char tag) {
    std::string k(d.allowed.begin(), d.allowed.end());
    k.push_back(tag);
    k += std::to_string(x);
    return k;
}

// Path-state chain rooted at the tip of a fixed prefix. Each step out of a
// state is classified by the callbacks below.
enum class Move { kill, success, truncate, restart };

struct PathChain {
    int n = 0;
    std::vector<Eigen::Triplet<double>> trans;
    std::vector<std::pair<int, double>> success, restart;
};

template <class OnExit, class OnHit>
PathChain build_path_chain(const SurfaceGraph& g, const std::vector<int>& pre_v, const std::vector<Word>& pre_w,
                           const std::vector<char>& allowed, OnExit on_exit, OnHit on_hit, long long cap) {
    struct State {
        int parent, vertex, depth;
        Word word;
    };
    const int L = static_cast<int>(pre_v.size()) - 1;
    std::vector<State> st{{-1, pre_v.back(), L, pre_w.back()}};
    PathChain pc;
    std::vector<int> on_path(g.num_vertices(), -1);
    std::vector<int> state_at;
    std::vector<Word> word_at;
    for (size_t s = 0; s < st.size(); ++s) {
        std::fill(on_path.begin(), on_path.end(), -1);
        state_at.assign(st[s].depth + 1, -1);
        word_at.assign(st[s].depth + 1, Word{});
        for (int k = 0; k <= L; ++k) {
            on_path[pre_v[k]] = k;
            word_at[k] = pre_w[k];
        }
        for (int c = static_cast<int>(s); c != -1; c = st[c].parent) {
            on_path[st[c].vertex] = st[c].depth;
            state_at[st[c].depth] = c;
            word_at[st[c].depth] = st[c].word;
        }
        for (int d : g.out_darts(st[s].vertex)) {
            const double p = g.q(d);
            const int w = g.edges[d].head;
            Move m;
            int pos = on_path[w];
            Word cur = compose(st[s].word, g.edges[d].label);
            if (!allowed[w])
                m = on_exit(w);
            else if (pos >= 0)
                m = on_hit(pos, word_at[pos] == cur);
            else {
                int c = static_cast<int>(st.size());
                if (c >= cap)
                    throw std::runtime_error("path-state chain exceeds " + std::to_string(cap) +
                                             " states; raise the state cap");
                st.push_back({static_cast<int>(s), w, st[s].depth + 1, cur});
                pc.trans.emplace_back(static_cast<int>(s), c, p);
                continue;
            }
            switch (m) {
                case Move::kill: break;
                case Move::success: pc.success.emplace_back(static_cast<int>(s), p); break;
                case Move::restart: pc.restart.emplace_back(static_cast<int>(s), p); break;
                case Move::truncate:
                    if (pos < L || state_at[pos] < 0) throw std::logic_error("truncation into the prefix");
                    pc.trans.emplace_back(static_cast<int>(s), state_at[pos], p);
                    break;
            }
        }
    }
    pc.n = static_cast<int>(st.size());
    return pc;
}

// Expected visits to each state from state 0; restarts re-enter state 0
// when with_restart is set and are dropped otherwise.
Eigen::VectorXd path_chain_visits(const PathChain& pc, bool with_restart) {
    std::vector<Eigen::Triplet<double>> a;
    a.reserve(pc.trans.size() + pc.restart.size() + pc.n);
    for (int i = 0; i < pc.n; ++i) a.emplace_back(i, i, 1.0);
    for (auto& t : pc.trans) a.emplace_back(t.col(), t.row(), -t.value());
    if (with_restart)
        for (auto& [s, p] : pc.restart) a.emplace_back(0, s, -p);
    Eigen::SparseMatrix<double> A(pc.n, pc.n);
    A.setFromTriplets(a.begin(), a.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw std::runtime_error("path-state chain: singular system");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(pc.n);
    rhs(0) = 1;
    return lu.solve(rhs);
}

}  // namespace

double LoopMeasure::g_exit(const DomainSpec& d, int x) {
    const int V = g_.num_vertices();
    std::vector<int> idx(V, -1);
    int n = 0;
    for (int v = 0; v < V; ++v)
        if (d.contains(v)) idx[v] = n++;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    for (int v = 0; v < V; ++v) {
        if (idx[v] < 0) continue;
        for (int e : g_.out_darts(v)) {
            int w = g_.edges[e].head;
            if (idx[w] >= 0) A(idx[v], idx[w]) -= g_.q(e);
        }
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(idx[x]) = 1;
    Eigen::VectorXd col = A.partialPivLu().solve(rhs);
    return col(idx[x]);
}

double LoopMeasure::g_nc(const DomainSpec& d, int x) {
    auto pc = build_path_chain(
        g_, {x}, {g_.identity()}, d.allowed, [](int) { return Move::kill; },
        [](int pos, bool same) {
            if (pos == 0) return same ? Move::restart : Move::kill;
            return same ? Move::truncate : Move::kill;
        },
        cap_);
    return path_chain_visits(pc, true)(0);
}

double LoopMeasure::g_value(const DomainSpec& d, int x) {
    if (x < 0 || x >= g_.num_vertices() || !d.contains(x)) throw std::invalid_argument("g_value: vertex not in the domain");
    auto key = cache_key(d, x, d.mode == KillMode::exit_only ? 'e' : 'n');
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    double v = d.mode == KillMode::exit_only ? g_exit(d, x) : g_nc(d, x);
    cache_.emplace(key, v);
    return v;
}

double LoopMeasure::f_value(const DomainSpec& d, int x) {
    if (!d.contains(x)) throw std::invalid_argument("f_value: vertex not in the domain");
    if (d.mode == KillMode::exit_or_nc) {
        auto pc = build_path_chain(
            g_, {x}, {g_.identity()}, d.allowed, [](int) { return Move::kill; },
            [](int pos, bool same) {
                if (pos == 0) return same ? Move::success : Move::kill;
                return same ? Move::truncate : Move::kill;
            },
            cap_);
        auto y = path_chain_visits(pc, false);
        double f = 0;
        for (auto& [s, p] : pc.success) f += y(s) * p;
        return f;
    }
    const int V = g_.num_vertices();
    std::vector<int> idx(V, -1);
    int n = 0;
    for (int v = 0; v < V; ++v)
        if (d.contains(v) && v != x) idx[v] = n++;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int v = 0; v < V; ++v) {
        if (idx[v] < 0) continue;
        for (int e : g_.out_darts(v)) {
            int w = g_.edges[e].head;
            if (w == x)
                b(idx[v]) += g_.q(e);
            else if (idx[w] >= 0)
                A(idx[v], idx[w]) -= g_.q(e);
        }
    }
    Eigen::VectorXd h = n ? Eigen::VectorXd(A.partialPivLu().solve(b)) : Eigen::VectorXd();
    double f = 0;
    for (int e : g_.out_darts(x)) {
        int w = g_.edges[e].head;
        if (w == x)
            f += g_.q(e);
        else if (idx[w] >= 0)
            f += g_.q(e) * h(idx[w]);
    }
    return f;
}

double LoopMeasure::log_mass_intersecting(const std::vector<std::vector<int>>& vertex_paths, const DomainSpec& d) {
    DomainSpec a = d;
    double s = 0;
    for (auto& path : vertex_paths)
        for (int v : path) {
            if (!a.contains(v)) continue;
            s += std::log(g_value(a, v));
            a.allowed[v] = 0;
        }
    return s;
}

double LoopMeasure::density(const std::vector<std::vector<int>>& dart_paths, KillMode mode) {
    std::set<int> darts;
    std::vector<std::vector<int>> vs;
    for (auto& p : dart_paths) {
        darts.insert(p.begin(), p.end());
        vs.push_back(path_tails(g_, p));
    }
    double lq = 0;
    for (int d : darts) lq += std::log(g_.q(d));
    return std::exp(lq + log_mass_intersecting(vs, DomainSpec::interior(g_, mode)));
}

double LoopMeasure::pair_rn_factor(const std::vector<int>& v1, const std::vector<int>& v2, const DomainSpec& d) {
    return log_mass_intersecting({v1}, d) + log_mass_intersecting({v2}, d) - log_mass_intersecting({v1, v2}, d);
}

double LoopMeasure::surface_escape(const std::vector<int>& eta, int start) {
    std::vector<int> pre_v{start};
    std::vector<Word> pre_w{g_.identity()};
    for (int d : eta) {
        pre_v.push_back(g_.edges[d].head);
        pre_w.push_back(compose(pre_w.back(), g_.edges[d].label));
    }
    const int L = static_cast<int>(eta.size());
    auto dom = DomainSpec::interior(g_, KillMode::exit_or_nc);
    auto pc = build_path_chain(
        g_, pre_v, pre_w, dom.allowed, [](int) { return Move::success; },
        [L](int pos, bool same) {
            if (!same) return Move::success;
            return pos <= L ? Move::kill : Move::truncate;
        },
        cap_);
    auto y = path_chain_visits(pc, false);
    double p = 0;
    for (auto& [s, q] : pc.success) p += y(s) * q;
    return p;
}

namespace {

std::vector<int> path_vertices(const SurfaceGraph& g, const std::vector<int>& darts, int start) {
    std::vector<int> vs{start};
    for (int d : darts) vs.push_back(g.edges[d].head);
    return vs;
}

std::vector<char> mask_of(const SurfaceGraph& g, const std::vector<int>& vs) {
    std::vector<char> m(g.num_vertices(), 0);
    for (int v : vs) m[v] = 1;
    return m;
}

}  // namespace

double PlanarMarginals::prefix(const std::vector<int>& eta, int x0) {
    const auto& g = lm.graph();
    auto vs = path_vertices(g, eta, x0);
    auto dom = DomainSpec::interior(g, KillMode::exit_only);
    std::vector<char> good(g.num_vertices(), 0);
    for (int b : g.boundary_vertices()) good[b] = 1;
    double esc = g.is_boundary(vs.back()) ? 1.0 : hit_probability(g, vs.back(), mask_of(g, vs), good, true);
    return std::exp(log_q(g, eta) + lm.log_mass_intersecting({vs}, dom)) * esc;
}

double PlanarMarginals::suffix(const std::vector<int>& eta_plus, int x0, int x_plus) {
    const auto& g = lm.graph();
    auto vs = path_vertices(g, eta_plus, x_plus);
    auto dom = DomainSpec::interior(g, KillMode::exit_only);
    std::vector<char> good(g.num_vertices(), 0);
    good[x_plus] = 1;
    double hit = hit_probability(g, x0, mask_of(g, vs), good, false);
    return std::exp(log_q(g, eta_plus) + lm.log_mass_intersecting({vs}, dom)) * hit;
}

double PlanarMarginals::prefix_suffix(const std::vector<int>& eta_minus, const std::vector<int>& eta_plus, int x0,
                                      int x_plus) {
    const auto& g = lm.graph();
    auto vm = path_vertices(g, eta_minus, x0);
    auto vp = path_vertices(g, eta_plus, x_plus);
    auto dom = DomainSpec::interior(g, KillMode::exit_only);
    auto stop = mask_of(g, vm);
    for (int v : vp) stop[v] = 1;
    std::vector<char> good(g.num_vertices(), 0);
    good[x_plus] = 1;
    double hit = hit_probability(g, vm.back(), stop, good, true);
    return std::exp(log_q(g, eta_minus) + log_q(g, eta_plus) + lm.log_mass_intersecting({vm, vp}, dom)) * hit;
}

double PlanarMarginals::conditional(const std::vector<int>& gamma, size_t k, int x0) {
    const auto& g = lm.graph();
    std::vector<int> eta(gamma.begin(), gamma.begin() + k), rest(gamma.begin() + k, gamma.end());
    auto vs = path_vertices(g, eta, x0);
    auto dom = DomainSpec::interior(g, KillMode::exit_only).without(vs);
    std::vector<char> good(g.num_vertices(), 0);
    for (int b : g.boundary_vertices()) good[b] = 1;
    double esc = hit_probability(g, vs.back(), mask_of(g, vs), good, true);
    return std::exp(log_q(g, rest) + lm.log_mass_intersecting({path_tails(g, gamma)}, dom)) / esc;
}

double SurfaceMarginals::prefix(const std::vector<int>& eta, int z) {
    const auto& g = lm.graph();
    auto vs = path_vertices(g, eta, z);
    auto dom = DomainSpec::interior(g, KillMode::exit_or_nc);
    double esc = g.is_boundary(vs.back()) ? 1.0 : lm.surface_escape(eta, z);
    return std::exp(log_q(g, eta) + lm.log_mass_intersecting({vs}, dom)) * esc;
}

double SurfaceMarginals::conditional(const std::vector<int>& gamma, size_t k, int z) {
    const auto& g = lm.graph();
    std::vector<int> eta(gamma.begin(), gamma.begin() + k), rest(gamma.begin() + k, gamma.end());
    auto vs = path_vertices(g, eta, z);
    auto dom = DomainSpec::interior(g, KillMode::exit_or_nc).without(vs);
    double esc = g.is_boundary(vs.back()) ? 1.0 : lm.surface_escape(eta, z);
    return std::exp(log_q(g, rest) + lm.log_mass_intersecting({path_tails(g, gamma)}, dom)) / esc;
}

namespace {

Eigen::MatrixXd restricted_q(const SurfaceGraph& g, const std::vector<char>& allowed) {
    const int V = g.num_vertices();
    std::vector<int> idx(V, -1);
    int n = 0;
    for (int v = 0; v < V; ++v)
        if (allowed[v]) idx[v] = n++;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    for (int v = 0; v < V; ++v) {
        if (idx[v] < 0) continue;
        for (int d : g.out_darts(v)) {
            int w = g.edges[d].head;
            if (idx[w] >= 0) Q(idx[v], idx[w]) += g.q(d);
        }
    }
    return Q;
}

}  // namespace

SeriesResult loop_mass_series(const SurfaceGraph& g, const std::vector<char>& allowed, const std::vector<int>& hit,
                              double tol) {
    std::vector<char> rest = allowed;
    for (int v : hit) rest[v] = 0;
    Eigen::MatrixXd QA = restricted_q(g, allowed), QB = restricted_q(g, rest);
    const int n = static_cast<int>(QA.rows());
    SeriesResult r;
    if (n == 0) return r;
    double rho = QA.eigenvalues().cwiseAbs().maxCoeff();
    if (!(rho < 1)) throw std::domain_error("loop series diverges: spectral radius " + std::to_string(rho));
    Eigen::MatrixXd PA = Eigen::MatrixXd::Identity(n, n), PB = Eigen::MatrixXd::Identity(QB.rows(), QB.rows());
    for (int k = 1; k <= 200000; ++k) {
        PA = PA * QA;
        PB = PB * QB;
        r.mass += (PA.trace() - (QB.rows() ? PB.trace() : 0.0)) / k;
        r.terms = k;
        r.tail_bound = n * std::pow(rho, k + 1) / ((k + 1) * (1 - rho));
        if (r.tail_bound < tol) return r;
    }
    throw std::runtime_error("loop series did not reach the tolerance");
}

double long_loop_mass(const SurfaceGraph& g, int L) {
    auto Q = restricted_q(g, DomainSpec::interior(g, KillMode::exit_only).allowed);
    const int n = static_cast<int>(Q.rows());
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    double logdet = 0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - Q);
    Eigen::MatrixXd U = lu.matrixLU().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) logdet += std::log(std::abs(U(i, i)));
    double s = -logdet;
    Eigen::MatrixXd P = I;
    for (int k = 1; k <= L; ++k) {
        P = P * Q;
        s -= P.trace() / k;
    }
    return s;
}

bool support_has_nc_cycle(const SurfaceGraph& g, const std::vector<int>& darts) {
    std::unordered_map<int, std::vector<int>> adj;
    for (int d : darts) {
        adj[g.edges[d].tail].push_back(d);
        int t = g.edges[d].twin;
        adj[g.edges[t].tail].push_back(t);
    }
    std::unordered_map<int, Word> lift;
    for (auto& [root, _] : adj) {
        if (lift.count(root)) continue;
        lift[root] = g.identity();
        std::vector<int> stack{root};
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int d : adj[u]) {
                int w = g.edges[d].head;
                Word cand = compose(lift[u], g.edges[d].label);
                auto it = lift.find(w);
                if (it == lift.end()) {
                    lift.emplace(w, cand);
                    stack.push_back(w);
                } else if (it->second != cand) {
                    return true;
                }
            }
        }
    }
    return false;
}

double nc_support_mass(const SurfaceGraph& g, int L) {
    std::map<std::set<int>, bool> memo;
    double total = 0;
    std::vector<int> path;
    std::function<void(int, int, double, Word)> rec = [&](int x, int u, double q, Word w) {
        if (static_cast<int>(path.size()) >= L) return;
        for (int d : g.out_darts(u)) {
            int v = g.edges[d].head;
            if (g.is_boundary(v)) continue;
            path.push_back(d);
            Word w2 = compose(w, g.edges[d].label);
            double q2 = q * g.q(d);
            if (v == x && w2.is_identity()) {
                std::set<int> support;
                for (int e : path) support.insert(g.undirected(e));
                auto it = memo.find(support);
                if (it == memo.end())
                    it = memo.emplace(support, support_has_nc_cycle(g, path)).first;
                if (it->second) total += q2 / static_cast<double>(path.size());
            }
            rec(x, v, q2, w2);
            path.pop_back();
        }
    };
    for (int x : g.interior_vertices()) rec(x, x, 1.0, g.identity());
    return total;
}

bool SoupLoop::visits(const SurfaceGraph& g, int v) const {
    for (int d : darts)
        if (g.edges[d].tail == v) return true;
    return false;
}

SoupLoop make_soup_loop(const SurfaceGraph& g, std::vector<int> darts) {
    SoupLoop l;
    l.darts = canonical_rotation(darts);
    l.log_q = log_q(g, l.darts);
    l.cls = loop_class(g, l.darts);
    return l;
}

namespace {

int sample_log_series(double f, Rng& rng) {
    const double norm = -std::log1p(-f);
    double u = rng.uniform() * norm;
    double term = f;
    int i = 1;
    double cum = term;
    while (u > cum && i < 100000000) {
        term *= f;
        ++i;
        cum += term / i;
    }
    return i;
}

}  // namespace

LoopSoup sample_loop_soup(LoopMeasure& lm, const DomainSpec& d, Rng& rng, const SoupOptions& opt) {
    const auto& g = lm.graph();
    std::vector<int> order;
    std::vector<char> used(g.num_vertices(), 0);
    for (int v : opt.order)
        if (d.contains(v) && !used[v]) {
            order.push_back(v);
            used[v] = 1;
        }
    for (int v = 0; v < g.num_vertices(); ++v)
        if (d.contains(v) && !used[v]) order.push_back(v);

    LoopSoup soup;
    DomainSpec a = d;
    long long budget = opt.excursion_budget;
    for (int x : order) {
        double gx = lm.g_value(a, x);
        double f = 1 - 1 / gx;
        if (f > 1e-15) {
            std::poisson_distribution<long long> pois(std::log(gx));
            long long count = pois(rng.engine());
            for (long long c = 0; c < count; ++c) {
                int k = sample_log_series(f, rng);
                std::vector<int> loop;
                for (int e = 0; e < k; ++e) {
                    while (true) {
                        if (--budget < 0)
                            throw std::runtime_error("loop soup: excursion budget exhausted (return probability " +
                                                     std::to_string(f) + ")");
                        std::vector<int> exc;
                        int u = x;
                        bool ok = true;
                        do {
                            int dd = step(g, u, rng);
                            exc.push_back(dd);
                            u = g.edges[dd].head;
                            if (!a.contains(u)) ok = false;
                        } while (ok && u != x);
                        if (ok && d.mode == KillMode::exit_or_nc) ok = is_wilson_contractible(g, exc);
                        if (ok) {
                            loop.insert(loop.end(), exc.begin(), exc.end());
                            break;
                        }
                    }
                }
                soup.push_back(make_soup_loop(g, std::move(loop)));
            }
        }
        a.allowed[x] = 0;
    }
    return soup;
}

LoopSoup soup_from_trajectory(const SurfaceGraph& g, const WalkTrajectory& traj, const std::vector<int>& branch,
                              Rng& rng) {
    const auto& ds = traj.darts;
    std::vector<int> vert{traj.start};
    for (int d : ds) vert.push_back(g.edges[d].head);
    LoopSoup soup;
    int from = 0;
    for (int x : path_tails(g, branch)) {
        int last = -1;
        for (int t = static_cast<int>(vert.size()) - 1; t >= from; --t)
            if (vert[t] == x) {
                last = t;
                break;
            }
        if (last < 0 || vert[from] != x) throw std::logic_error("trajectory does not match its loop erasure");
        std::vector<int> cut{from};
        for (int t = from + 1; t <= last; ++t)
            if (vert[t] == x) cut.push_back(t);
        const int k = static_cast<int>(cut.size()) - 1;
        if (k > 0) {
            std::vector<int> perm(k);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng.engine());
            std::vector<char> seen(k, 0);
            for (int i = 0; i < k; ++i) {
                if (seen[i]) continue;
                std::vector<int> loop;
                for (int j = i; !seen[j]; j = perm[j]) {
                    seen[j] = 1;
                    loop.insert(loop.end(), ds.begin() + cut[j], ds.begin() + cut[j + 1]);
                }
                soup.push_back(make_soup_loop(g, std::move(loop)));
            }
        }
        from = last + 1;
    }
    return soup;
}

Estimate empirical_mass(const std::function<bool(const SoupLoop&)>& pred,
                        const std::function<LoopSoup(long long)>& realisation, long long n) {
    if (n <= 0) throw std::invalid_argument("empirical mass needs n > 0");
    double s = 0, s2 = 0;
    for (long long i = 0; i < n; ++i) {
        double c = 0;
        for (auto& l : realisation(i)) c += pred(l);
        s += c;
        s2 += c * c;
    }
    return mean_estimate(s, s2, n);
}

}  // namespace crsf
