#include "crsf/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace crsf {

namespace {

struct Builder {
    SurfaceGraph g;

    int vertex(double x, double y, bool boundary = false) {
        g.vertices.push_back({x, y, boundary});
        return static_cast<int>(g.vertices.size()) - 1;
    }
    // Returns the forward dart; its twin is the next id.
    int edge(int t, int h, double wf, double wb, const Word& label, bool aux = false) {
        int d = static_cast<int>(g.edges.size());
        g.edges.push_back({t, h, wf, label, d + 1, aux});
        g.edges.push_back({h, t, wb, label.inverse(), d, aux});
        return d;
    }
    int twin(int d) const { return g.edges[d].twin; }
    void face(std::vector<int> darts) {
        bool disc = true;
        for (int d : darts) disc &= !g.vertices[g.edges[d].tail].boundary;
        g.faces.push_back({std::move(darts), disc});
    }
};

Word free_letter(int x) { return Word::free_word({x}); }

}  // namespace

SurfaceGraph make_torus_grid(int nx, int ny) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("torus grid needs at least 2 by 2");
    Builder b;
    b.g.spec = SurfaceSpec::make(1, 0);
    auto id = [&](int i, int j) { return ((j % ny + ny) % ny) * nx + ((i % nx + nx) % nx); };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) b.vertex(i, j);
    std::vector<int> h(nx * ny), v(nx * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            h[id(i, j)] = b.edge(id(i, j), id(i + 1, j), 1, 1, Word::z2(i == nx - 1, 0));
            v[id(i, j)] = b.edge(id(i, j), id(i, j + 1), 1, 1, Word::z2(0, j == ny - 1));
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            b.face({h[id(i, j)], v[id(i + 1, j)], b.twin(h[id(i, j + 1)]), b.twin(v[id(i, j)])});
    b.g.periods = {{double(nx), 0}, {0, double(ny)}};
    b.g.finalize();
    return b.g;
}

SurfaceGraph make_holed_torus(int n, int r, std::pair<int, int> pf) {
    if (n < 3 || r < 0 || 2 * r > n - 2) throw std::invalid_argument("holed torus: bad size");
    auto [pi, pj] = pf;
    if (pi < 0 || pj < 0 || pi > n - 2 || pj > n - 2) throw std::invalid_argument("holed torus: puncture face must not wrap");
    Builder b;
    b.g.spec = SurfaceSpec::make(1, 1);
    auto wrap = [&](int i) { return (i % n + n) % n; };
    auto removed = [&](int i) { return r > 0 && (wrap(i) >= n - r || wrap(i) < r); };
    std::map<std::pair<int, int>, int> vid;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (!(removed(i) && removed(j))) vid[{i, j}] = b.vertex(i, j);
    int hole = b.vertex(n - 0.5, n - 0.5, true);
    auto id = [&](int i, int j) {
        auto it = vid.find({wrap(i), wrap(j)});
        return it == vid.end() ? hole : it->second;
    };
    // Lattice edge p -> q, with removed endpoints collapsed onto the hole.
    auto lattice = [&](int i, int j, int di, int dj) {
        int p = id(i, j), q = id(i + di, j + dj);
        if (p == hole && q == hole) return -1;
        Word lab = di ? (i == n - 1 ? free_letter(1) : Word::identity(GroupKind::free))
                      : (j == n - 1 ? free_letter(2) : Word::identity(GroupKind::free));
        return b.edge(p, q, p == hole ? 0 : 1, q == hole ? 0 : 1, lab);
    };
    std::map<std::pair<int, int>, int> h, v;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            h[{i, j}] = lattice(i, j, 1, 0);
            v[{i, j}] = lattice(i, j, 0, 1);
        }
    int c00 = id(n - 1, n - 1), c10 = id(0, n - 1), c11 = id(0, 0), c01 = id(n - 1, 0);
    std::map<int, int> spoke;
    if (r == 0)
        for (int c : {c00, c10, c11, c01}) spoke[c] = b.edge(c, hole, 1, 0, Word::identity(GroupKind::free));
    int aux = -1;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int e0 = h[{i, j}], e1 = v[{wrap(i + 1), j}], e2 = h[{i, wrap(j + 1)}], e3 = v[{i, j}];
            if (r == 0 && i == n - 1 && j == n - 1) {
                b.face({e0, spoke[c10], b.twin(spoke[c00])});
                b.face({e1, spoke[c11], b.twin(spoke[c10])});
                b.face({b.twin(e2), spoke[c01], b.twin(spoke[c11])});
                b.face({b.twin(e3), spoke[c00], b.twin(spoke[c01])});
                continue;
            }
            if (i == pi && j == pj) {
                aux = b.edge(id(i, j), id(i + 1, j + 1), 0, 0, Word::identity(GroupKind::free), true);
                b.face({e0, e1, b.twin(aux)});
                b.face({aux, b.twin(e2), b.twin(e3)});
                continue;
            }
            std::vector<int> ds;
            if (e0 >= 0) ds.push_back(e0);
            if (e1 >= 0) ds.push_back(e1);
            if (e2 >= 0) ds.push_back(b.twin(e2));
            if (e3 >= 0) ds.push_back(b.twin(e3));
            if (!ds.empty()) b.face(ds);
        }
    b.g.punctures.push_back({-1, id(pi, pj), id(pi + 1, pj + 1), aux});
    b.g.periods = {{double(n), 0}, {0, double(n)}};
    b.g.finalize();
    return b.g;
}

SurfaceGraph make_planar_wired(const std::vector<std::array<double, 2>>& pts, const std::vector<std::pair<int, int>>& links,
                               const std::vector<std::pair<int, std::array<double, 2>>>& to_boundary,
                               const std::vector<double>& link_weights, const std::vector<double>& boundary_weights) {
    Builder b;
    b.g.spec = SurfaceSpec::make(0, 1, true);
    double cx = 0, cy = 0;
    for (auto& p : pts) {
        b.vertex(p[0], p[1]);
        cx += p[0] / pts.size();
        cy += p[1] / pts.size();
    }
    int bd = b.vertex(cx, cy, true);
    const Word id = Word::identity(GroupKind::free);
    std::vector<double> angle;
    for (size_t k = 0; k < links.size(); ++k) {
        auto [i, j] = links[k];
        double w = link_weights.empty() ? 1.0 : link_weights[k];
        b.edge(i, j, w, w, id);
        double dx = pts[j][0] - pts[i][0], dy = pts[j][1] - pts[i][1];
        angle.push_back(std::atan2(dy, dx));
        angle.push_back(std::atan2(-dy, -dx));
    }
    for (size_t k = 0; k < to_boundary.size(); ++k) {
        auto [i, dir] = to_boundary[k];
        double w = boundary_weights.empty() ? 1.0 : boundary_weights[k];
        b.edge(i, bd, w, 0, id);
        angle.push_back(std::atan2(dir[1], dir[0]));
        // Around the boundary vertex, order stubs by the polar angle of their
        // midpoints; seen from the point at infinity that order is reversed.
        angle.push_back(-std::atan2(pts[i][1] + 0.5 * dir[1] - cy, pts[i][0] + 0.5 * dir[0] - cx));
    }
    const int V = static_cast<int>(b.g.vertices.size()), E = static_cast<int>(b.g.edges.size());
    std::vector<std::vector<int>> rot(V);
    for (int d = 0; d < E; ++d) rot[b.g.edges[d].tail].push_back(d);
    std::vector<int> rank(E);
    for (auto& r : rot) {
        std::sort(r.begin(), r.end(), [&](int x, int y) { return angle[x] < angle[y]; });
        for (size_t k = 0; k < r.size(); ++k) rank[r[k]] = static_cast<int>(k);
    }
    auto next = [&](int d) {
        int t = b.g.edges[d].twin;
        auto& r = rot[b.g.edges[d].head];
        return r[(rank[t] + r.size() - 1) % r.size()];
    };
    std::vector<char> done(E, 0);
    for (int d = 0; d < E; ++d) {
        if (done[d]) continue;
        std::vector<int> ds;
        for (int c = d; !done[c]; c = next(c)) {
            done[c] = 1;
            ds.push_back(c);
        }
        b.face(ds);
    }
    b.g.finalize();
    return b.g;
}

SurfaceGraph make_wired_grid(int n) {
    std::vector<std::array<double, 2>> pts;
    std::vector<std::pair<int, int>> links;
    std::vector<std::pair<int, std::array<double, 2>>> ghosts;
    auto id = [&](int i, int j) { return j * n + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) pts.push_back({double(i), double(j)});
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (i + 1 < n) links.push_back({id(i, j), id(i + 1, j)});
            if (j + 1 < n) links.push_back({id(i, j), id(i, j + 1)});
            if (i == 0) ghosts.push_back({id(i, j), {-1, 0}});
            if (i == n - 1) ghosts.push_back({id(i, j), {1, 0}});
            if (j == 0) ghosts.push_back({id(i, j), {0, -1}});
            if (j == n - 1) ghosts.push_back({id(i, j), {0, 1}});
        }
    return make_planar_wired(pts, links, ghosts);
}

SurfaceGraph make_wired_disc(double radius) {
    std::vector<std::array<double, 2>> pts;
    std::map<std::pair<int, int>, int> at;
    int m = static_cast<int>(std::ceil(radius)) + 1;
    for (int j = -m; j <= m; ++j)
        for (int i = -m; i <= m; ++i) {
            double x = i + 0.5, y = j + 0.5;
            if (std::hypot(x, y) < radius) {
                at[{i, j}] = static_cast<int>(pts.size());
                pts.push_back({x, y});
            }
        }
    std::vector<std::pair<int, int>> links;
    std::vector<std::pair<int, std::array<double, 2>>> ghosts;
    const int dirs[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (auto& [ij, k] : at)
        for (auto& dd : dirs) {
            auto it = at.find({ij.first + dd[0], ij.second + dd[1]});
            if (it == at.end())
                ghosts.push_back({k, {double(dd[0]), double(dd[1])}});
            else if (dd[0] + dd[1] > 0)
                links.push_back({k, it->second});
        }
    return make_planar_wired(pts, links, ghosts);
}

SurfaceGraph make_chain() {
    Builder b;
    b.g.spec = SurfaceSpec::make(0, 2);
    int L = b.vertex(-1, 0, true), x = b.vertex(0, 0), y = b.vertex(1, 0), R = b.vertex(2, 0, true);
    const Word id = Word::identity(GroupKind::free);
    int xl = b.edge(x, L, 1, 0, id);
    int xy = b.edge(x, y, 1, 1, id);
    int yr = b.edge(y, R, 1, 0, id);
    b.face({b.twin(xl), xy, yr, b.twin(yr), b.twin(xy), xl});
    b.g.finalize();
    return b.g;
}

SurfaceGraph make_annulus_ring(int n) {
    if (n < 3) throw std::invalid_argument("annulus ring needs n >= 3");
    Builder b;
    b.g.spec = SurfaceSpec::make(0, 2);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < n; ++i) b.vertex(2 * std::cos(2 * pi * i / n), 2 * std::sin(2 * pi * i / n));
    int in = b.vertex(0, 0, true), out = b.vertex(4, 0, true);
    const Word id = Word::identity(GroupKind::free);
    std::vector<int> ring(n), si(n), so(n);
    for (int i = 0; i < n; ++i) {
        ring[i] = b.edge(i, (i + 1) % n, 1, 1, i == n - 1 ? free_letter(1) : id);
        si[i] = b.edge(i, in, 1, 0, id);
        so[i] = b.edge(i, out, 1, 0, id);
    }
    for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        b.face({b.twin(si[i]), ring[i], si[j]});
        b.face({b.twin(ring[i]), so[i], b.twin(so[j])});
    }
    b.g.finalize();
    return b.g;
}

}  // namespace crsf
