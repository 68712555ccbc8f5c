#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crsf/homotopy.hpp"

namespace crsf {

struct unsupported_surface : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SurfaceSpec {
    int genus = 1;
    int boundary = 0;
    // A disc is accepted only for planar (simply connected) loop-measure work.
    bool planar = false;

    static SurfaceSpec make(int genus, int boundary, bool planar = false);

    int euler_char() const { return 2 - 2 * genus - boundary; }
    int puncture_count() const { return euler_char() < 0 ? -euler_char() : 0; }
    GroupKind group_kind() const { return genus == 1 && boundary == 0 ? GroupKind::torus_z2 : GroupKind::free; }
    int rank() const { return group_kind() == GroupKind::torus_z2 ? 2 : 2 * genus + boundary - 1; }
};

struct Vertex {
    double x = 0, y = 0;
    bool boundary = false;
};

// Directed edge (dart). Every dart has a twin running the other way with the
// inverse label; the pair is one undirected edge of the embedded map.
struct Edge {
    int tail = -1, head = -1;
    double weight = 0;
    Word label;
    int twin = -1;
    bool aux = false;
};

struct Face {
    std::vector<int> darts;  // counterclockwise, face on the left
    bool disc = true;
};

struct Puncture {
    int face = -1;
    int u = -1, v = -1;
    int edge = -1;  // aux dart u -> v
};

class SurfaceGraph {
public:
    SurfaceSpec spec;
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    std::vector<Face> faces;
    std::vector<Puncture> punctures;
    // Optional translation per free generator / torus axis, used for drawing.
    std::vector<std::array<double, 2>> periods;

    // Validates the map and builds lookup tables. Must be called once after
    // the tables above are filled; the graph is read-only afterwards.
    void finalize();

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_faces() const { return static_cast<int>(faces.size()); }
    bool is_boundary(int v) const { return vertices[v].boundary; }
    GroupKind kind() const { return spec.group_kind(); }
    Word identity() const { return Word::identity(kind()); }

    const std::vector<int>& out_darts(int v) const { return out_[v]; }  // positive weight only
    const std::vector<int>& all_out(int v) const { return all_out_[v]; }
    double out_weight(int v) const { return out_weight_[v]; }
    double q(int d) const { return q_[d]; }
    int face_of(int d) const { return face_of_[d]; }
    int pos_in_face(int d) const { return pos_[d]; }
    int next_in_face(int d) const;
    int undirected(int d) const { return d < edges[d].twin ? d : edges[d].twin; }
    std::vector<int> interior_vertices() const;
    std::vector<int> boundary_vertices() const;

private:
    std::vector<std::vector<int>> out_, all_out_;
    std::vector<double> out_weight_, q_;
    std::vector<int> face_of_, pos_;
};

Word loop_class(const SurfaceGraph& g, const std::vector<int>& darts);
bool is_wilson_contractible(const SurfaceGraph& g, const std::vector<int>& darts);
bool is_eta_contractible(const SurfaceGraph& g, const std::vector<int>& darts,
                         const std::vector<std::vector<int>>& paths);

// Simple-loop decomposition by chronological erasure from the root.
std::vector<std::vector<int>> chronological_simple_loops(const SurfaceGraph& g, const std::vector<int>& darts);

struct Skeleton {
    std::vector<std::vector<int>> branches;  // dart paths from u_1, v_1, ...
    std::vector<int> aux;                    // puncture darts
};

struct ComplementComponent {
    std::vector<int> faces;
    int chi = 0;
    int boundary_circles = 0;
};

struct ComplementReport {
    std::vector<ComplementComponent> components;
    int skeleton_chi = 0;  // V - E of the skeleton inside the open surface
    bool euler_additive = false;
};

ComplementReport complement_components(const SurfaceGraph& g, const Skeleton& s);
bool is_temperleyan(const SurfaceGraph& g, const Skeleton& s);

// Target laws on CRSFs: wired (no conditioning), Temperleyan, and
// Temperleyan reweighted by 2^{K dagger}.
enum class Law { wwils, wils, temp };

struct Cycle {
    std::vector<int> darts;
    Word cls;
};

struct CRSFSample {
    std::vector<int> out;  // per vertex, -1 on boundary
    std::vector<Cycle> cycles;
    int K = 0;
    int K_dagger = 0;
    std::optional<Skeleton> skeleton;
    int attempts = 1;
    std::string dual_diagnostic;  // empty when the dual peel was clean
};

// Cycles of an out-edge map, each starting at its smallest dart id.
std::vector<Cycle> find_cycles(const SurfaceGraph& g, const std::vector<int>& out);
// Throws std::logic_error when the map is not a CRSF.
void check_crsf(const SurfaceGraph& g, const std::vector<int>& out);
Skeleton skeleton_of(const SurfaceGraph& g, const std::vector<int>& out);
// Fills cycles, K, K_dagger, dual_diagnostic from out.
void annotate(const SurfaceGraph& g, CRSFSample& s);

struct DualCycles {
    int K_dagger = 0;
    std::vector<std::vector<int>> cycles;  // faces in order
    std::vector<Word> classes;
    std::string diagnostic;
};

DualCycles dual_complement_cycles(const SurfaceGraph& g, const std::vector<int>& out);

// Planar translation of a deck element through the drawing periods.
std::array<double, 2> word_offset(const SurfaceGraph& g, const Word& w);

// Canonical representative of an unrooted loop: least rotation of the dart ids.
std::vector<int> canonical_rotation(const std::vector<int>& darts);

}  // namespace crsf
