#include "crsf/pairchain.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "crsf/exactdist.hpp"

namespace crsf {

double ScaleSystem::radius(double n) const { return delta * std::exp2(n); }

bool ScaleSystem::inside(const SurfaceGraph& g, int v, double n) const {
    if (g.is_boundary(v)) return false;
    const auto& p = g.vertices[v];
    return std::hypot(p.x - ox, p.y - oy) < radius(n);
}

void ScaleSystem::validate(const SurfaceGraph& g) const {
    if (!(delta > 0) || N < 1) throw std::invalid_argument("scale system needs delta > 0 and N >= 1");
    if (x1 < 0 || x2 < 0 || x1 >= g.num_vertices() || x2 >= g.num_vertices() || x1 == x2)
        throw std::invalid_argument("scale system: bad start vertices");
    if (!inside(g, x1, 1) || !inside(g, x2, 1)) throw std::invalid_argument("scale system: starts outside B_1");
    bool adjacent = false;
    for (int d : g.all_out(x1)) adjacent |= g.edges[d].head == x2;
    if (!adjacent) throw std::invalid_argument("scale system: starts are not neighbours");
}

int nearest_vertex(const SurfaceGraph& g, double x, double y) {
    int best = -1;
    double bd = INFINITY;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (g.is_boundary(v)) continue;
        double d = std::hypot(g.vertices[v].x - x, g.vertices[v].y - y);
        if (d < bd) bd = d, best = v;
    }
    if (best < 0) throw std::invalid_argument("graph has no interior vertex");
    return best;
}

std::vector<int> walk_vertices(const SurfaceGraph& g, const std::vector<int>& darts, int start) {
    std::vector<int> vs{start};
    for (int d : darts) {
        if (g.edges[d].tail != vs.back()) throw std::invalid_argument("dart path is not connected");
        vs.push_back(g.edges[d].head);
    }
    return vs;
}

namespace {

struct Split {
    std::vector<int> head, middle, tail;
};

Split split_path(const SurfaceGraph& g, const ScaleSystem& s, const std::vector<int>& darts, int start, int m, int n) {
    auto vs = walk_vertices(g, darts, start);
    const int k = static_cast<int>(darts.size());
    int a = -1;
    for (int i = 0; i <= k && a < 0; ++i)
        if (!s.inside(g, vs[i], m)) a = i;
    if (a < 0) throw std::domain_error("path never exits B_" + std::to_string(m));
    int b = -1;
    for (int i = 0; i <= k; ++i)
        if (s.inside(g, vs[i], n)) b = i;
    if (b == k) throw std::domain_error("path ends inside B_" + std::to_string(n));
    Split r;
    r.head.assign(darts.begin(), darts.begin() + a);
    r.middle.assign(darts.begin() + a, darts.begin() + b + 1);
    r.tail.assign(darts.begin() + b + 1, darts.end());
    return r;
}

std::string mask_key(const std::vector<char>& mask) { return std::string(mask.begin(), mask.end()); }

bool is_prefix(const std::vector<int>& p, const std::vector<int>& q) {
    return p.size() <= q.size() && std::equal(p.begin(), p.end(), q.begin());
}

std::vector<std::array<double, 2>> points(const SurfaceGraph& g, const std::vector<int>& vs) {
    std::vector<std::array<double, 2>> out;
    for (int v : vs)
        if (!g.is_boundary(v)) out.push_back({g.vertices[v].x, g.vertices[v].y});
    return out;
}

std::vector<int> in_annulus(const SurfaceGraph& g, const ScaleSystem& s, const std::vector<int>& vs, double lo, double hi,
                            bool closed_hi) {
    std::vector<int> out;
    for (int v : vs) {
        if (g.is_boundary(v)) continue;
        double r = std::hypot(g.vertices[v].x - s.ox, g.vertices[v].y - s.oy);
        if (r >= s.radius(lo) && (closed_hi ? r <= s.radius(hi) : r < s.radius(hi))) out.push_back(v);
    }
    return out;
}

}  // namespace

Decomposition decompose(const SurfaceGraph& g, const ScaleSystem& s, const PathPair& pair, int m, int n) {
    if (m > n) throw std::invalid_argument("decompose needs m <= n");
    auto a = split_path(g, s, pair.first, s.x1, m, n);
    auto b = split_path(g, s, pair.second, s.x2, m, n);
    return {{a.head, b.head}, {a.middle, b.middle}, {a.tail, b.tail}};
}

PathPair concat(const PathPair& a, const PathPair& b) {
    PathPair r = a;
    r.first.insert(r.first.end(), b.first.begin(), b.first.end());
    r.second.insert(r.second.end(), b.second.begin(), b.second.end());
    return r;
}

int ray_crossing(const SurfaceGraph& g, double ox, double oy, int d) {
    const auto& e = g.edges[d];
    if (g.is_boundary(e.tail) || g.is_boundary(e.head)) return 0;
    const double py = g.vertices[e.tail].y - oy, qy = g.vertices[e.head].y - oy;
    if ((py < 0) == (qy < 0)) return 0;
    const double px = g.vertices[e.tail].x - ox, qx = g.vertices[e.head].x - ox;
    const double x = px + (0 - py) * (qx - px) / (qy - py);
    if (!(x > 0)) return 0;
    return qy >= 0 ? 1 : -1;
}

PairChain::PairChain(const SurfaceGraph& g, const ScaleSystem& s, long long cap, int fourier_points)
    : g_(g), s_(s), cap_(cap), M_(fourier_points), lm_(g) {
    s_.validate(g_);
    if (M_ < 8) throw std::invalid_argument("too few Fourier points");
    ray_.resize(g_.num_edges());
    for (int d = 0; d < g_.num_edges(); ++d) ray_[d] = ray_crossing(g_, s_.ox, s_.oy, d);
}

// Averaging -log|det(I - Q(theta))| over M equally spaced phases keeps the
// loops whose winding is a multiple of M; longer windings are negligible.
double PairChain::winding_zero_mass(const std::vector<char>& domain) {
    auto key = mask_key(domain);
    if (auto it = wz_cache_.find(key); it != wz_cache_.end()) return it->second;
    std::vector<int> idx(g_.num_vertices(), -1), verts;
    for (int v = 0; v < g_.num_vertices(); ++v)
        if (domain[v] && !g_.is_boundary(v)) {
            idx[v] = static_cast<int>(verts.size());
            verts.push_back(v);
        }
    const int n = static_cast<int>(verts.size());
    double total = 0;
    if (n > 0) {
        for (int k = 0; k < M_; ++k) {
            const double theta = 2 * std::numbers::pi * k / M_;
            Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(n, n);
            for (int i = 0; i < n; ++i)
                for (int d : g_.out_darts(verts[i])) {
                    int j = idx[g_.edges[d].head];
                    if (j < 0) continue;
                    A(i, j) -= g_.q(d) * std::polar(1.0, theta * ray_[d]);
                }
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
            double logdet = 0;
            for (int i = 0; i < n; ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
            total -= logdet;
        }
        total /= M_;
    }
    wz_cache_.emplace(key, total);
    return total;
}

double PairChain::loop_mass_both(int m, const std::vector<int>& v1, const std::vector<int>& v2) {
    std::vector<char> ball(g_.num_vertices(), 0);
    for (int v = 0; v < g_.num_vertices(); ++v) ball[v] = s_.inside(g_, v, m);
    auto minus = [&](const std::vector<char>& base, const std::vector<int>& vs) {
        auto r = base;
        for (int v : vs) r[v] = 0;
        return r;
    };
    auto b1 = minus(ball, v1), b2 = minus(ball, v2), b12 = minus(b1, v2);
    return winding_zero_mass(ball) - winding_zero_mass(b1) - winding_zero_mass(b2) + winding_zero_mass(b12);
}

bool PairChain::is_pair_at(const PathPair& p, int m) const {
    for (int side = 0; side < 2; ++side) {
        const auto& darts = side ? p.second : p.first;
        int v = side ? s_.x2 : s_.x1;
        std::set<int> seen{v};
        for (size_t i = 0; i < darts.size(); ++i) {
            const auto& e = g_.edges[darts[i]];
            if (e.tail != v || !(g_.q(darts[i]) > 0) || !s_.inside(g_, v, m)) return false;
            v = e.head;
            if (!seen.insert(v).second) return false;
        }
        if (s_.inside(g_, v, m)) return false;
    }
    return true;
}

bool PairChain::disjoint(const PathPair& p) const {
    std::set<int> a;
    for (int v : walk_vertices(g_, p.first, s_.x1))
        if (!g_.is_boundary(v)) a.insert(v);
    for (int v : walk_vertices(g_, p.second, s_.x2))
        if (!g_.is_boundary(v) && a.count(v)) return false;
    return true;
}

double PairChain::mu(const PathPair& p) {
    PlanarMarginals pm{lm_};
    return pm.prefix(p.first, s_.x1) * pm.prefix(p.second, s_.x2);
}

double PairChain::lambda(const PathPair& pair_m, int m) {
    if (m < 1 || m > s_.N) throw std::invalid_argument("scale index out of range");
    if (!is_pair_at(pair_m, m)) throw std::invalid_argument("not a pair of paths to the first exit of B_m");
    if (!disjoint(pair_m)) return 0;
    double mu_value = mu(pair_m);
    if (mu_value == 0) return 0;
    auto v1 = walk_vertices(g_, pair_m.first, s_.x1), v2 = walk_vertices(g_, pair_m.second, s_.x2);
    return std::exp(-loop_mass_both(m, v1, v2)) * mu_value;
}

std::vector<std::vector<int>> PairChain::extensions(const std::vector<int>& darts, int start, int n) const {
    auto vs = walk_vertices(g_, darts, start);
    std::vector<std::vector<int>> out;
    if (!s_.inside(g_, vs.back(), n)) {
        out.push_back(darts);
        return out;
    }
    std::set<int> used(vs.begin(), vs.end());
    std::vector<int> path = darts;
    auto dfs = [&](auto&& self, int v) -> void {
        for (int d : g_.out_darts(v)) {
            int w = g_.edges[d].head;
            if (used.count(w)) continue;
            path.push_back(d);
            if (!s_.inside(g_, w, n)) {
                out.push_back(path);
                if (static_cast<long long>(out.size()) > cap_) throw state_cap_exceeded("path extensions", cap_);
            } else {
                used.insert(w);
                self(self, w);
                used.erase(w);
            }
            path.pop_back();
        }
    };
    dfs(dfs, vs.back());
    return out;
}

std::vector<PathPair> PairChain::extensions(const PathPair& pair_m, int n) const {
    auto e1 = extensions(pair_m.first, s_.x1, n), e2 = extensions(pair_m.second, s_.x2, n);
    if (static_cast<double>(e1.size()) * static_cast<double>(e2.size()) > static_cast<double>(cap_))
        throw state_cap_exceeded("pair extensions", static_cast<long long>(e1.size() * e2.size()));
    std::vector<PathPair> out;
    for (auto& a : e1)
        for (auto& b : e2) {
            PathPair p{a, b};
            if (disjoint(p)) out.push_back(std::move(p));
        }
    return out;
}

std::vector<PathPair> PairChain::admissible(int n) const { return extensions(PathPair{}, n); }

double PairChain::lambda_marginal(int n, const PathPair& pair_m, int m) {
    if (m > n || n > s_.N) throw std::invalid_argument("lambda_marginal needs m <= n <= N");
    if (!is_pair_at(pair_m, m)) throw std::invalid_argument("not a pair of paths to the first exit of B_m");
    if (!disjoint(pair_m)) return 0;
    double sum = 0;
    for (auto& p : extensions(pair_m, n)) sum += lambda(p, n);
    return sum;
}

double PairChain::h_value(const PathPair& pair_m, int m) {
    double lm = lambda(pair_m, m);
    if (lm == 0) throw std::domain_error("h undefined: lambda_m vanishes");
    return lambda_marginal(s_.N, pair_m, m) / lm;
}

double PairChain::transition_prob(const PathPair& pair_m, const PathPair& pair_next, int m) {
    if (m >= s_.N) throw std::invalid_argument("no transition from the last scale");
    if (!is_pair_at(pair_next, m + 1) || !is_prefix(pair_m.first, pair_next.first) ||
        !is_prefix(pair_m.second, pair_next.second) || !is_pair_at(pair_m, m))
        throw std::invalid_argument("pair_next does not extend pair_m");
    double lam_m = lambda(pair_m, m);
    if (lam_m == 0) throw std::domain_error("transition undefined: lambda_m vanishes");
    double h_m = lambda_marginal(s_.N, pair_m, m) / lam_m;
    if (h_m == 0) throw std::domain_error("transition undefined: h vanishes");
    double lam_next = lambda(pair_next, m + 1);
    if (lam_next == 0) return 0;
    double h_next = lambda_marginal(s_.N, pair_next, m + 1) / lam_next;
    return lam_next / lam_m * (h_next / h_m);
}

double PairChain::Z(int n) {
    double sum = 0;
    for (auto& p : admissible(n)) sum += lambda(p, n);
    return sum;
}

bool point_sets_separated(const std::vector<std::array<double, 2>>& a, const std::vector<std::array<double, 2>>& b,
                          double t) {
    if (a.empty() || b.empty()) return true;
    if (!(t > 0)) return true;
    auto cell = [t](double x) { return static_cast<long long>(std::floor(x / t)); };
    std::unordered_map<long long, std::vector<int>> grid;
    auto key = [](long long i, long long j) { return i * 2'000'003LL + j; };
    for (size_t i = 0; i < b.size(); ++i) grid[key(cell(b[i][0]), cell(b[i][1]))].push_back(static_cast<int>(i));
    for (auto& p : a) {
        long long ci = cell(p[0]), cj = cell(p[1]);
        for (long long di = -1; di <= 1; ++di)
            for (long long dj = -1; dj <= 1; ++dj) {
                auto it = grid.find(key(ci + di, cj + dj));
                if (it == grid.end()) continue;
                for (int k : it->second)
                    if (std::hypot(p[0] - b[k][0], p[1] - b[k][1]) < t) return false;
            }
    }
    return true;
}

bool sep_n(const SurfaceGraph& g, const ScaleSystem& s, const PathPair& pair, int n, const SepConstants& c) {
    auto cut = [&](const std::vector<int>& darts, int start) {
        auto vs = walk_vertices(g, darts, start);
        for (size_t i = 0; i < vs.size(); ++i)
            if (!s.inside(g, vs[i], n)) {
                vs.resize(i + 1);
                break;
            }
        return vs;
    };
    auto v1 = cut(pair.first, s.x1), v2 = cut(pair.second, s.x2);
    std::set<int> a;
    for (int v : v1)
        if (!g.is_boundary(v)) a.insert(v);
    for (int v : v2)
        if (!g.is_boundary(v) && a.count(v)) return false;
    return point_sets_separated(points(g, in_annulus(g, s, v1, n - 0.5, n, false)),
                                points(g, in_annulus(g, s, v2, n - 0.5, n, false)), c.c_sep * s.radius(n));
}

bool sep_dot(const SurfaceGraph& g, const ScaleSystem& s, const PathPair& tail, int v1, int v2, int n,
             const SepConstants& c) {
    auto a = walk_vertices(g, tail.first, v1), b = walk_vertices(g, tail.second, v2);
    return point_sets_separated(points(g, in_annulus(g, s, a, n, n + 0.5, false)),
                                points(g, in_annulus(g, s, b, n, n + 0.5, false)), c.c_dot * s.radius(n));
}

bool sep_mn(const SurfaceGraph& g, const ScaleSystem& s, const PathPair& pair, int m, int n, const SepConstants& c) {
    auto dec = decompose(g, s, pair, m, n);
    auto tails_of = [&](const std::vector<int>& darts) {
        std::vector<int> vs;
        for (int d : darts) vs.push_back(g.edges[d].tail);
        return vs;
    };
    auto mid1 = tails_of(dec.middle.first), mid2 = tails_of(dec.middle.second);
    for (auto* mid : {&mid1, &mid2})
        if (in_annulus(g, s, *mid, m - 1, n + 1, true).size() != mid->size()) return false;
    if (!sep_n(g, s, dec.head, m, c)) return false;
    auto start_of = [&](const std::vector<int>& full, const std::vector<int>& tail) {
        return tail.empty() ? walk_vertices(g, full, g.edges[full.front()].tail).back() : g.edges[tail.front()].tail;
    };
    if (pair.first.empty() || pair.second.empty()) return false;
    if (!sep_dot(g, s, dec.tail, start_of(pair.first, dec.tail.first), start_of(pair.second, dec.tail.second), n, c))
        return false;
    const double t = c.c_mid * s.radius(m);
    auto full1 = walk_vertices(g, pair.first, s.x1), full2 = walk_vertices(g, pair.second, s.x2);
    return point_sets_separated(points(g, mid1), points(g, full2), t) &&
           point_sets_separated(points(g, mid2), points(g, full1), t);
}

}  // namespace crsf
