#include "crsf/surface.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace crsf {

SurfaceSpec SurfaceSpec::make(int genus, int boundary, bool planar) {
    if (genus < 0 || boundary < 0) throw std::invalid_argument("negative genus or boundary count");
    SurfaceSpec s;
    s.genus = genus;
    s.boundary = boundary;
    s.planar = planar;
    if (boundary == 0 && genus >= 2)
        throw unsupported_surface("closed surfaces of genus >= 2 are not supported");
    if (s.euler_char() > 0) {
        if (!(planar && genus == 0 && boundary == 1))
            throw std::invalid_argument("surface with positive Euler characteristic rejected (sphere or disc)");
    }
    if (planar && !(genus == 0 && boundary == 1)) throw std::invalid_argument("planar flag requires a disc");
    return s;
}

namespace {

[[noreturn]] void bad_graph(const std::string& what) { throw std::invalid_argument("invalid surface graph: " + what); }

Word product(const SurfaceGraph& g, const std::vector<int>& darts) {
    Word w = g.identity();
    for (int d : darts) compose_into(w, g.edges[d].label);
    return w;
}

}  // namespace

void SurfaceGraph::finalize() {
    spec = SurfaceSpec::make(spec.genus, spec.boundary, spec.planar);
    const int V = num_vertices(), E = num_edges(), F = num_faces();
    if (V == 0) bad_graph("no vertices");
    int nb = 0;
    for (auto& v : vertices) nb += v.boundary;
    if (nb != spec.boundary)
        bad_graph("expected " + std::to_string(spec.boundary) + " boundary vertices, found " + std::to_string(nb));

    out_.assign(V, {});
    all_out_.assign(V, {});
    out_weight_.assign(V, 0.0);
    q_.assign(E, 0.0);
    for (int d = 0; d < E; ++d) {
        const Edge& e = edges[d];
        if (e.tail < 0 || e.tail >= V || e.head < 0 || e.head >= V) bad_graph("edge " + std::to_string(d) + " endpoint out of range");
        if (e.twin < 0 || e.twin >= E || e.twin == d) bad_graph("edge " + std::to_string(d) + " has no twin");
        const Edge& t = edges[e.twin];
        if (t.twin != d || t.tail != e.head || t.head != e.tail) bad_graph("edge " + std::to_string(d) + " twin mismatch");
        if (e.label.kind != kind()) bad_graph("edge " + std::to_string(d) + " label of wrong group");
        if (t.label != e.label.inverse()) bad_graph("edge " + std::to_string(d) + " twin label is not the inverse");
        for (int x : e.label.letters)
            if (std::abs(x) > spec.rank()) bad_graph("edge " + std::to_string(d) + " uses a generator beyond the rank");
        if (!(e.weight >= 0)) bad_graph("edge " + std::to_string(d) + " negative weight");
        if (e.aux && (e.weight != 0 || !t.aux)) bad_graph("aux edge " + std::to_string(d) + " must have zero weight both ways");
        if (vertices[e.tail].boundary && e.weight != 0) bad_graph("boundary vertex with outgoing weight");
        all_out_[e.tail].push_back(d);
        if (e.weight > 0) {
            out_[e.tail].push_back(d);
            out_weight_[e.tail] += e.weight;
        }
    }
    for (int v = 0; v < V; ++v) {
        if (all_out_[v].empty()) bad_graph("isolated vertex " + std::to_string(v));
        if (!vertices[v].boundary && !(out_weight_[v] > 0)) bad_graph("interior vertex " + std::to_string(v) + " has no outgoing weight");
    }
    for (int d = 0; d < E; ++d)
        if (edges[d].weight > 0) q_[d] = edges[d].weight / out_weight_[edges[d].tail];

    face_of_.assign(E, -1);
    pos_.assign(E, -1);
    for (int f = 0; f < F; ++f) {
        const auto& ds = faces[f].darts;
        if (ds.empty()) bad_graph("empty face " + std::to_string(f));
        bool touches_boundary = false;
        for (size_t i = 0; i < ds.size(); ++i) {
            int d = ds[i];
            if (d < 0 || d >= E) bad_graph("face " + std::to_string(f) + " dart out of range");
            if (face_of_[d] != -1) bad_graph("dart " + std::to_string(d) + " in two faces");
            face_of_[d] = f;
            pos_[d] = static_cast<int>(i);
            int nxt = ds[(i + 1) % ds.size()];
            if (nxt < 0 || nxt >= E || edges[d].head != edges[nxt].tail) bad_graph("face " + std::to_string(f) + " is not a closed walk");
            touches_boundary |= vertices[edges[d].tail].boundary;
        }
        if (!touches_boundary && !faces[f].disc) bad_graph("face " + std::to_string(f) + " away from the boundary must be a disc");
        if (touches_boundary && faces[f].disc) bad_graph("face " + std::to_string(f) + " touches the boundary but is flagged disc");
        if (faces[f].disc && !product(*this, ds).is_identity())
            bad_graph("disc face " + std::to_string(f) + " has nontrivial boundary word");
    }
    for (int d = 0; d < E; ++d)
        if (face_of_[d] == -1) bad_graph("dart " + std::to_string(d) + " in no face");
    if (V - E / 2 + F != spec.euler_char() + spec.boundary)
        bad_graph("Euler count V - E + F = " + std::to_string(V - E / 2 + F) + " does not match the surface");

    if (static_cast<int>(punctures.size()) != (spec.planar ? 0 : spec.puncture_count()))
        bad_graph("expected " + std::to_string(spec.puncture_count()) + " punctures");
    std::set<int> aux_seen;
    for (auto& p : punctures) {
        if (p.edge < 0 || p.edge >= E) bad_graph("puncture edge out of range");
        const Edge& e = edges[p.edge];
        if (!e.aux || e.tail != p.u || e.head != p.v) bad_graph("puncture edge does not join u and v");
        if (vertices[p.u].boundary || vertices[p.v].boundary) bad_graph("puncture vertex on the boundary");
        if (!faces[face_of_[p.edge]].disc || !faces[face_of_[e.twin]].disc) bad_graph("puncture edge must split a disc face");
        p.face = face_of_[p.edge];
        aux_seen.insert(undirected(p.edge));
    }
    for (int d = 0; d < E; ++d)
        if (edges[d].aux && !aux_seen.count(undirected(d))) bad_graph("aux edge without puncture");
}

int SurfaceGraph::next_in_face(int d) const {
    const auto& ds = faces[face_of_[d]].darts;
    return ds[(pos_[d] + 1) % ds.size()];
}

std::vector<int> SurfaceGraph::interior_vertices() const {
    std::vector<int> r;
    for (int v = 0; v < num_vertices(); ++v)
        if (!vertices[v].boundary) r.push_back(v);
    return r;
}

std::vector<int> SurfaceGraph::boundary_vertices() const {
    std::vector<int> r;
    for (int v = 0; v < num_vertices(); ++v)
        if (vertices[v].boundary) r.push_back(v);
    return r;
}

Word loop_class(const SurfaceGraph& g, const std::vector<int>& darts) {
    if (darts.empty()) throw std::invalid_argument("loop_class: empty loop");
    for (size_t i = 0; i < darts.size(); ++i) {
        int nxt = darts[(i + 1) % darts.size()];
        if (g.edges[darts[i]].head != g.edges[nxt].tail) throw std::invalid_argument("loop_class: edge sequence is not closed");
    }
    return product(g, darts);
}

std::vector<std::vector<int>> chronological_simple_loops(const SurfaceGraph& g, const std::vector<int>& darts) {
    loop_class(g, darts);  // closedness
    std::map<int, int> pos;
    std::vector<int> path_v{g.edges[darts[0]].tail}, path_d;
    pos[path_v[0]] = 0;
    std::vector<std::vector<int>> loops;
    for (int d : darts) {
        int w = g.edges[d].head;
        auto it = pos.find(w);
        if (it == pos.end()) {
            pos[w] = static_cast<int>(path_v.size());
            path_v.push_back(w);
            path_d.push_back(d);
            continue;
        }
        int p = it->second;
        std::vector<int> loop(path_d.begin() + p, path_d.end());
        loop.push_back(d);
        loops.push_back(std::move(loop));
        for (size_t i = p + 1; i < path_v.size(); ++i) pos.erase(path_v[i]);
        path_v.resize(p + 1);
        path_d.resize(p);
    }
    return loops;
}

bool is_wilson_contractible(const SurfaceGraph& g, const std::vector<int>& darts) {
    // Stored prefix words play the role of the lifts; a return with a
    // different word closes a noncontractible simple loop.
    loop_class(g, darts);
    std::map<int, std::pair<int, Word>> on_path;
    std::vector<int> path_v{g.edges[darts[0]].tail};
    on_path[path_v[0]] = {0, g.identity()};
    Word cur = g.identity();
    for (int d : darts) {
        compose_into(cur, g.edges[d].label);
        int w = g.edges[d].head;
        auto it = on_path.find(w);
        if (it == on_path.end()) {
            on_path[w] = {static_cast<int>(path_v.size()), cur};
            path_v.push_back(w);
            continue;
        }
        if (it->second.second != cur) return false;
        int p = it->second.first;
        for (size_t i = p + 1; i < path_v.size(); ++i) on_path.erase(path_v[i]);
        path_v.resize(p + 1);
    }
    return true;
}

bool is_eta_contractible(const SurfaceGraph& g, const std::vector<int>& darts, const std::vector<std::vector<int>>& paths) {
    std::set<int> on_loop;
    for (int d : darts) on_loop.insert(g.edges[d].tail);
    for (auto& path : paths)
        for (int v : path)
            if (on_loop.count(v)) {
                auto it = std::find_if(darts.begin(), darts.end(), [&](int d) { return g.edges[d].tail == v; });
                std::vector<int> rooted(it, darts.end());
                rooted.insert(rooted.end(), darts.begin(), it);
                return is_wilson_contractible(g, rooted);
            }
    return false;
}

namespace {

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

std::vector<char> skeleton_edges(const SurfaceGraph& g, const Skeleton& s) {
    std::vector<char> in(g.num_edges(), 0);
    auto mark = [&](int d) {
        if (d < 0 || d >= g.num_edges()) throw std::invalid_argument("skeleton edge not in graph");
        in[d] = in[g.edges[d].twin] = 1;
    };
    for (auto& b : s.branches)
        for (int d : b) mark(d);
    for (int d : s.aux) mark(d);
    return in;
}

}  // namespace

ComplementReport complement_components(const SurfaceGraph& g, const Skeleton& s) {
    auto in_skel = skeleton_edges(g, s);
    const int V = g.num_vertices(), E = g.num_edges(), F = g.num_faces();
    UnionFind uf(F);
    for (int d = 0; d < E; ++d)
        if (!in_skel[d]) uf.unite(g.face_of(d), g.face_of(g.edges[d].twin));

    std::map<int, int> comp_index;
    ComplementReport rep;
    for (int f = 0; f < F; ++f) {
        int r = uf.find(f);
        auto [it, fresh] = comp_index.emplace(r, static_cast<int>(rep.components.size()));
        if (fresh) rep.components.emplace_back();
        rep.components[it->second].faces.push_back(f);
        rep.components[it->second].chi += 1;
    }
    auto comp_of_dart = [&](int d) { return comp_index.at(uf.find(g.face_of(d))); };

    std::vector<char> skel_vertex(V, 0);
    int skel_e = 0;
    for (int d = 0; d < E; ++d) {
        if (!in_skel[d]) {
            if (d < g.edges[d].twin) rep.components[comp_of_dart(d)].chi -= 1;
            continue;
        }
        if (d < g.edges[d].twin) ++skel_e;
        skel_vertex[g.edges[d].tail] = 1;
    }
    int skel_v = 0;
    for (int v = 0; v < V; ++v) {
        if (g.is_boundary(v)) continue;
        if (skel_vertex[v])
            ++skel_v;
        else
            rep.components[comp_of_dart(g.all_out(v)[0])].chi += 1;
    }
    rep.skeleton_chi = skel_v - skel_e;

    // Trace the boundary of each cut-open component. Rotating around a
    // boundary vertex walks along its circle, which is always part of the
    // component boundary.
    std::vector<char> seen(E, 0);
    for (int d = 0; d < E; ++d) {
        if (!in_skel[d] || seen[d]) continue;
        int c = comp_of_dart(d);
        int cur = d;
        do {
            seen[cur] = 1;
            int nxt = g.next_in_face(cur);
            int guard = 0;
            while (!in_skel[nxt]) {
                nxt = g.next_in_face(g.edges[nxt].twin);
                if (++guard > E) throw std::logic_error("boundary trace did not close");
            }
            cur = nxt;
        } while (cur != d);
        rep.components[c].boundary_circles += 1;
    }
    for (int v = 0; v < V; ++v)
        if (g.is_boundary(v) && !skel_vertex[v]) {
            bool touched = false;
            for (int d : g.all_out(v)) touched |= in_skel[d] != 0;
            if (!touched) rep.components[comp_of_dart(g.all_out(v)[0])].boundary_circles += 1;
        }

    int total = rep.skeleton_chi;
    for (auto& c : rep.components) total += c.chi;
    rep.euler_additive = total == g.spec.euler_char();
    return rep;
}

bool is_temperleyan(const SurfaceGraph& g, const Skeleton& s) {
    auto rep = complement_components(g, s);
    if (!rep.euler_additive) throw std::logic_error("complement Euler characteristics do not add up");
    bool ok = true;
    for (auto& c : rep.components) {
        int twice_genus = 2 - c.boundary_circles - c.chi;
        if (twice_genus < 0 || twice_genus % 2 != 0)
            throw std::logic_error("complement component with inconsistent Euler data");
        if (c.chi == 0 && c.boundary_circles != 0 && c.boundary_circles != 2)
            throw std::logic_error("zero Euler characteristic but not an annulus");
        ok &= c.chi == 0;
    }
    return ok;
}

std::vector<Cycle> find_cycles(const SurfaceGraph& g, const std::vector<int>& out) {
    const int V = g.num_vertices();
    std::vector<int> state(V, 0);  // 0 new, 1 on stack, 2 done
    std::vector<Cycle> cycles;
    for (int s = 0; s < V; ++s) {
        if (state[s] || out[s] < 0) continue;
        std::vector<int> stack;
        int v = s;
        while (v >= 0 && state[v] == 0 && out[v] >= 0) {
            state[v] = 1;
            stack.push_back(v);
            v = g.edges[out[v]].head;
        }
        if (v >= 0 && state[v] == 1) {
            Cycle c;
            int u = v;
            do {
                c.darts.push_back(out[u]);
                u = g.edges[out[u]].head;
            } while (u != v);
            auto m = std::min_element(c.darts.begin(), c.darts.end());
            std::rotate(c.darts.begin(), m, c.darts.end());
            c.cls = loop_class(g, c.darts);
            cycles.push_back(std::move(c));
        }
        for (int u : stack) state[u] = 2;
    }
    return cycles;
}

void check_crsf(const SurfaceGraph& g, const std::vector<int>& out) {
    if (static_cast<int>(out.size()) != g.num_vertices()) throw std::logic_error("out-edge map has wrong size");
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (g.is_boundary(v)) {
            if (out[v] != -1) throw std::logic_error("boundary vertex with an out-edge");
            continue;
        }
        int d = out[v];
        if (d < 0 || d >= g.num_edges() || g.edges[d].tail != v || !(g.edges[d].weight > 0))
            throw std::logic_error("vertex " + std::to_string(v) + " lacks a valid out-edge");
    }
    for (auto& c : find_cycles(g, out))
        if (c.cls.is_identity()) throw std::logic_error("contractible cycle in CRSF");
}

Skeleton skeleton_of(const SurfaceGraph& g, const std::vector<int>& out) {
    Skeleton s;
    for (auto& p : g.punctures) {
        for (int start : {p.u, p.v}) {
            std::vector<int> branch;
            std::set<int> seen{start};
            int v = start;
            while (!g.is_boundary(v)) {
                int d = out[v];
                if (d < 0) throw std::logic_error("skeleton branch leaves the forest at vertex " + std::to_string(v));
                branch.push_back(d);
                v = g.edges[d].head;
                if (!seen.insert(v).second) break;
            }
            s.branches.push_back(std::move(branch));
        }
        s.aux.push_back(p.edge);
    }
    return s;
}

namespace {

// Prefix words along each face from a reference corner, split into runs that
// avoid boundary vertices. seg = -1 marks a corner at a boundary vertex.
struct FaceCorners {
    std::vector<Word> prefix;
    std::vector<int> seg;
};

std::vector<FaceCorners> face_corners(const SurfaceGraph& g) {
    std::vector<FaceCorners> out(g.num_faces());
    for (int f = 0; f < g.num_faces(); ++f) {
        const auto& ds = g.faces[f].darts;
        const int m = static_cast<int>(ds.size());
        auto& fc = out[f];
        fc.prefix.assign(m, g.identity());
        fc.seg.assign(m, -1);
        auto tail_b = [&](int i) { return g.is_boundary(g.edges[ds[(i % m + m) % m]].tail); };
        int start = -1;
        for (int i = 0; i < m; ++i)
            if (tail_b(i)) {
                start = i;
                break;
            }
        if (start == -1) {
            Word w = g.identity();
            for (int i = 0; i < m; ++i) {
                fc.prefix[i] = w;
                fc.seg[i] = 0;
                compose_into(w, g.edges[ds[i]].label);
            }
            continue;
        }
        int seg = -1;
        Word w = g.identity();
        for (int k = 1; k <= m; ++k) {
            int i = (start + k) % m;
            if (tail_b(i)) continue;
            if (tail_b(i - 1)) {
                ++seg;
                w = g.identity();
            }
            fc.prefix[i] = w;
            fc.seg[i] = seg;
            compose_into(w, g.edges[ds[i]].label);
        }
    }
    return out;
}

}  // namespace

DualCycles dual_complement_cycles(const SurfaceGraph& g, const std::vector<int>& out) {
    const int E = g.num_edges(), F = g.num_faces();
    std::vector<char> present(E, 0);
    for (int v = 0; v < g.num_vertices(); ++v)
        if (out[v] >= 0) present[out[v]] = present[g.edges[out[v]].twin] = 1;
    for (auto& p : g.punctures) present[p.edge] = present[g.edges[p.edge].twin] = 1;

    auto corners = face_corners(g);
    struct DualEdge {
        int f1, f2;
        Word label;  // f1 -> f2
        int seg1, seg2;
        bool alive = true;
    };
    std::vector<DualEdge> dual;
    std::vector<std::vector<int>> inc(F);
    DualCycles res;
    for (int d = 0; d < E; ++d) {
        if (present[d] || d > g.edges[d].twin) continue;
        const Edge& e = g.edges[d];
        int t = e.twin;
        bool via_tail = !g.is_boundary(e.tail);
        if (!via_tail && g.is_boundary(e.head)) {
            res.diagnostic += "edge between two boundary vertices; ";
            continue;
        }
        int f1 = g.face_of(d), f2 = g.face_of(t);
        int c1 = via_tail ? g.pos_in_face(d) : g.pos_in_face(g.next_in_face(d));
        int c2 = via_tail ? g.pos_in_face(g.next_in_face(t)) : g.pos_in_face(t);
        Word lab = compose(corners[f1].prefix[c1], corners[f2].prefix[c2].inverse());
        int id = static_cast<int>(dual.size());
        dual.push_back({f1, f2, lab, corners[f1].seg[c1], corners[f2].seg[c2]});
        inc[f1].push_back(id);
        inc[f2].push_back(id);
    }

    std::vector<int> deg(F, 0);
    for (int f = 0; f < F; ++f) deg[f] = static_cast<int>(inc[f].size());
    std::queue<int> leaves;
    for (int f = 0; f < F; ++f)
        if (deg[f] == 1) leaves.push(f);
    while (!leaves.empty()) {
        int f = leaves.front();
        leaves.pop();
        if (deg[f] != 1) continue;
        for (int id : inc[f]) {
            if (!dual[id].alive) continue;
            dual[id].alive = false;
            int other = dual[id].f1 == f ? dual[id].f2 : dual[id].f1;
            deg[f] -= 1;
            deg[other] -= 1;
            if (deg[other] == 1) leaves.push(other);
            break;
        }
    }
    for (int f = 0; f < F; ++f)
        if (deg[f] != 0 && deg[f] != 2) {
            res.diagnostic += "dual residue is not a union of cycles; ";
            break;
        }

    std::vector<char> used(dual.size(), 0);
    for (size_t start = 0; start < dual.size(); ++start) {
        if (!dual[start].alive || used[start]) continue;
        std::vector<int> cyc;
        Word w = g.identity();
        int f = dual[start].f1;
        int id = static_cast<int>(start);
        int entry_seg = -2;
        int first_seg = dual[start].seg1;
        bool seg_ok = true;
        while (true) {
            used[id] = 1;
            const auto& de = dual[id];
            bool fwd = de.f1 == f;
            int exit_seg = fwd ? de.seg1 : de.seg2;
            if (entry_seg != -2 && entry_seg != exit_seg) seg_ok = false;
            compose_into(w, fwd ? de.label : de.label.inverse());
            cyc.push_back(f);
            f = fwd ? de.f2 : de.f1;
            entry_seg = fwd ? de.seg2 : de.seg1;
            int nxt = -1;
            for (int j : inc[f])
                if (dual[j].alive && !used[j]) {
                    nxt = j;
                    break;
                }
            if (nxt == -1) break;
            id = nxt;
        }
        if (entry_seg != first_seg) seg_ok = false;
        if (!seg_ok) res.diagnostic += "dual cycle crosses a non-disc face between boundary runs; ";
        if (w.is_identity())
            res.diagnostic += "contractible dual cycle remains; ";
        else
            res.K_dagger += 1;
        res.cycles.push_back(std::move(cyc));
        res.classes.push_back(w);
    }
    return res;
}

void annotate(const SurfaceGraph& g, CRSFSample& s) {
    s.cycles = find_cycles(g, s.out);
    s.K = 0;
    for (auto& c : s.cycles) s.K += !c.cls.is_identity();
    auto dual = dual_complement_cycles(g, s.out);
    s.K_dagger = dual.K_dagger;
    s.dual_diagnostic = dual.diagnostic;
    if (!g.punctures.empty()) s.skeleton = skeleton_of(g, s.out);
}

std::vector<int> canonical_rotation(const std::vector<int>& darts) {
    const size_t n = darts.size();
    size_t best = 0;
    for (size_t r = 1; r < n; ++r)
        for (size_t i = 0; i < n; ++i) {
            int a = darts[(r + i) % n], b = darts[(best + i) % n];
            if (a != b) {
                if (a < b) best = r;
                break;
            }
        }
    std::vector<int> out(darts.begin() + best, darts.end());
    out.insert(out.end(), darts.begin(), darts.begin() + best);
    return out;
}

std::array<double, 2> word_offset(const SurfaceGraph& g, const Word& w) {
    std::array<double, 2> o{0, 0};
    auto add = [&](int gen, double s) {
        if (gen < static_cast<int>(g.periods.size())) {
            o[0] += s * g.periods[gen][0];
            o[1] += s * g.periods[gen][1];
        }
    };
    if (w.kind == GroupKind::torus_z2) {
        add(0, static_cast<double>(w.shift[0]));
        add(1, static_cast<double>(w.shift[1]));
    } else {
        for (int x : w.letters) add(std::abs(x) - 1, x > 0 ? 1.0 : -1.0);
    }
    return o;
}

}  // namespace crsf
