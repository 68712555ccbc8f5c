#include "crsf/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace crsf {

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Line {
    int no;
    std::vector<std::string> tok;
};

std::vector<Line> tokenize(const std::string& text) {
    std::vector<Line> out;
    std::istringstream in(text);
    std::string raw;
    int no = 0;
    while (std::getline(in, raw)) {
        ++no;
        if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
        std::istringstream ls(raw);
        Line l{no, {}};
        std::string t;
        while (ls >> t) l.tok.push_back(t);
        if (!l.tok.empty()) out.push_back(std::move(l));
    }
    return out;
}

class Cursor {
public:
    explicit Cursor(std::vector<Line> lines) : lines_(std::move(lines)) {}
    const Line& next(const std::string& what) {
        if (pos_ >= lines_.size()) throw parse_error(last_line(), "unexpected end of input, expected " + what);
        return lines_[pos_++];
    }
    int last_line() const { return lines_.empty() ? 1 : lines_.back().no + 1; }

private:
    std::vector<Line> lines_;
    size_t pos_ = 0;
};

long long to_int(const Line& l, size_t i) {
    if (i >= l.tok.size()) throw parse_error(l.no, "missing field " + std::to_string(i + 1));
    try {
        size_t used = 0;
        long long v = std::stoll(l.tok[i], &used);
        if (used != l.tok[i].size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw parse_error(l.no, "expected an integer, got '" + l.tok[i] + "'");
    }
}

double to_double(const Line& l, size_t i) {
    if (i >= l.tok.size()) throw parse_error(l.no, "missing field " + std::to_string(i + 1));
    try {
        size_t used = 0;
        double v = std::stod(l.tok[i], &used);
        if (used != l.tok[i].size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw parse_error(l.no, "expected a number, got '" + l.tok[i] + "'");
    }
}

void expect_fields(const Line& l, size_t n) {
    if (l.tok.size() != n)
        throw parse_error(l.no, "expected " + std::to_string(n) + " fields, found " + std::to_string(l.tok.size()));
}

long long section(Cursor& c, const std::string& name) {
    const Line& l = c.next("section '" + name + "'");
    if (l.tok[0] != name) throw parse_error(l.no, "expected section '" + name + "', found '" + l.tok[0] + "'");
    expect_fields(l, 2);
    long long n = to_int(l, 1);
    if (n < 0) throw parse_error(l.no, "negative count");
    return n;
}

int index_in(const Line& l, size_t i, long long limit, const std::string& what) {
    long long v = to_int(l, i);
    if (v < 0 || v >= limit) throw parse_error(l.no, what + " index " + std::to_string(v) + " out of range");
    return static_cast<int>(v);
}

}  // namespace

std::string write_graph(const SurfaceGraph& g) {
    std::ostringstream os;
    os << "crsf-graph 1\n";
    os << "surface " << g.spec.genus << ' ' << g.spec.boundary << ' ' << (g.spec.planar ? 1 : 0) << '\n';
    os << "vertices " << g.num_vertices() << '\n';
    for (auto& v : g.vertices) os << fmt_double(v.x) << ' ' << fmt_double(v.y) << ' ' << (v.boundary ? 1 : 0) << '\n';
    os << "darts " << g.num_edges() << '\n';
    for (auto& e : g.edges)
        os << e.tail << ' ' << e.head << ' ' << fmt_double(e.weight) << ' ' << to_string(e.label) << ' ' << e.twin << ' '
           << (e.aux ? 1 : 0) << '\n';
    os << "faces " << g.num_faces() << '\n';
    for (auto& f : g.faces) {
        os << (f.disc ? 1 : 0) << ' ' << f.darts.size();
        for (int d : f.darts) os << ' ' << d;
        os << '\n';
    }
    os << "punctures " << g.punctures.size() << '\n';
    for (auto& p : g.punctures) os << p.face << ' ' << p.u << ' ' << p.v << ' ' << p.edge << '\n';
    os << "periods " << g.periods.size() << '\n';
    for (auto& p : g.periods) os << fmt_double(p[0]) << ' ' << fmt_double(p[1]) << '\n';
    os << "end\n";
    return os.str();
}

SurfaceGraph read_graph(const std::string& text) {
    Cursor c(tokenize(text));
    SurfaceGraph g;
    {
        const Line& l = c.next("header");
        if (l.tok[0] != "crsf-graph") throw parse_error(l.no, "not a crsf-graph file");
        expect_fields(l, 2);
        if (to_int(l, 1) != 1) throw parse_error(l.no, "unsupported format version " + l.tok[1]);
    }
    {
        const Line& l = c.next("surface");
        if (l.tok[0] != "surface") throw parse_error(l.no, "expected section 'surface'");
        expect_fields(l, 4);
        g.spec.genus = static_cast<int>(to_int(l, 1));
        g.spec.boundary = static_cast<int>(to_int(l, 2));
        g.spec.planar = to_int(l, 3) != 0;
        try {
            g.spec = SurfaceSpec::make(g.spec.genus, g.spec.boundary, g.spec.planar);
        } catch (const std::exception& e) {
            throw parse_error(l.no, e.what());
        }
    }
    const GroupKind kind = g.spec.group_kind();
    long long nv = section(c, "vertices");
    for (long long i = 0; i < nv; ++i) {
        const Line& l = c.next("vertex");
        expect_fields(l, 3);
        g.vertices.push_back({to_double(l, 0), to_double(l, 1), to_int(l, 2) != 0});
    }
    long long ne = section(c, "darts");
    std::vector<int> dart_line;
    for (long long i = 0; i < ne; ++i) {
        const Line& l = c.next("dart");
        expect_fields(l, 6);
        Edge e;
        e.tail = index_in(l, 0, nv, "vertex");
        e.head = index_in(l, 1, nv, "vertex");
        e.weight = to_double(l, 2);
        if (!(e.weight >= 0) || !std::isfinite(e.weight)) throw parse_error(l.no, "weight must be finite and >= 0");
        try {
            e.label = parse_word(kind, l.tok[3]);
        } catch (const std::exception& ex) {
            throw parse_error(l.no, std::string("bad label: ") + ex.what());
        }
        e.twin = index_in(l, 4, ne, "dart");
        e.aux = to_int(l, 5) != 0;
        g.edges.push_back(e);
        dart_line.push_back(l.no);
    }
    for (int d = 0; d < static_cast<int>(ne); ++d) {
        const Edge& e = g.edges[d];
        const Edge& t = g.edges[e.twin];
        if (e.twin == d || t.twin != d || t.tail != e.head || t.head != e.tail || t.label != e.label.inverse())
            throw parse_error(dart_line[d], "dart " + std::to_string(d) + " and its twin do not match");
    }
    long long nf = section(c, "faces");
    for (long long i = 0; i < nf; ++i) {
        const Line& l = c.next("face");
        if (l.tok.size() < 2) throw parse_error(l.no, "face needs disc flag and length");
        Face f;
        f.disc = to_int(l, 0) != 0;
        long long len = to_int(l, 1);
        if (len < 1) throw parse_error(l.no, "face length must be positive");
        expect_fields(l, static_cast<size_t>(2 + len));
        for (long long k = 0; k < len; ++k) f.darts.push_back(index_in(l, static_cast<size_t>(2 + k), ne, "dart"));
        g.faces.push_back(std::move(f));
    }
    long long np = section(c, "punctures");
    for (long long i = 0; i < np; ++i) {
        const Line& l = c.next("puncture");
        expect_fields(l, 4);
        g.punctures.push_back({index_in(l, 0, nf, "face"), index_in(l, 1, nv, "vertex"), index_in(l, 2, nv, "vertex"),
                               index_in(l, 3, ne, "dart")});
    }
    long long nper = section(c, "periods");
    for (long long i = 0; i < nper; ++i) {
        const Line& l = c.next("period");
        expect_fields(l, 2);
        g.periods.push_back({to_double(l, 0), to_double(l, 1)});
    }
    const Line& l = c.next("end");
    if (l.tok[0] != "end" || l.tok.size() != 1) throw parse_error(l.no, "expected 'end'");
    try {
        g.finalize();
    } catch (const std::exception& e) {
        throw parse_error(l.no, std::string("invalid graph: ") + e.what());
    }
    return g;
}

SurfaceGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return read_graph(ss.str());
}

void save_graph(const SurfaceGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << write_graph(g);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string graph_hash(const SurfaceGraph& g) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(write_graph(g))));
    return buf;
}

nlohmann::json sample_header(const SurfaceGraph& g, const std::string& law, std::uint64_t seed, long long n) {
    return {{"type", "header"}, {"format", "crsf-samples 1"}, {"law", law}, {"seed", seed}, {"n", n},
            {"graph_hash", graph_hash(g)}, {"graph", write_graph(g)}};
}

nlohmann::json sample_to_json(const CRSFSample& s, long long index, bool with_weight) {
    nlohmann::json j = {{"type", "sample"}, {"index", index}, {"out", s.out}, {"K", s.K}, {"K_dagger", s.K_dagger},
                        {"attempts", s.attempts}};
    auto cycles = nlohmann::json::array();
    for (auto& c : s.cycles) cycles.push_back({{"darts", c.darts}, {"class", to_string(c.cls)}});
    j["cycles"] = cycles;
    if (s.skeleton) j["skeleton"] = {{"branches", s.skeleton->branches}, {"aux", s.skeleton->aux}};
    if (!s.dual_diagnostic.empty()) j["dual_diagnostic"] = s.dual_diagnostic;
    if (with_weight) j["weight"] = std::ldexp(1.0, s.K_dagger);
    return j;
}

void write_samples(std::ostream& os, const nlohmann::json& header,
                   const std::vector<CRSFSample>& samples, bool with_weight) {
    os << header.dump() << '\n';
    for (size_t i = 0; i < samples.size(); ++i)
        os << sample_to_json(samples[i], static_cast<long long>(i), with_weight).dump() << '\n';
}

SampleFile read_samples(std::istream& is) {
    SampleFile f;
    std::string raw;
    int no = 0;
    bool have_header = false;
    while (std::getline(is, raw)) {
        ++no;
        if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(raw);
        } catch (const std::exception& e) {
            throw parse_error(no, std::string("invalid JSON: ") + e.what());
        }
        if (!have_header) {
            if (j.value("type", "") != "header" || j.value("format", "") != "crsf-samples 1")
                throw parse_error(no, "missing crsf-samples header");
            try {
                f.graph = read_graph(j.at("graph").get<std::string>());
            } catch (const parse_error& e) {
                throw parse_error(no, std::string("embedded graph, ") + e.what());
            }
            f.header = j;
            have_header = true;
            continue;
        }
        if (j.value("type", "") != "sample") throw parse_error(no, "expected a sample record");
        CRSFSample s;
        try {
            s.out = j.at("out").get<std::vector<int>>();
            s.attempts = j.value("attempts", 1);
        } catch (const std::exception& e) {
            throw parse_error(no, std::string("bad sample: ") + e.what());
        }
        if (static_cast<int>(s.out.size()) != f.graph.num_vertices()) throw parse_error(no, "out has wrong length");
        try {
            check_crsf(f.graph, s.out);
        } catch (const std::exception& e) {
            throw parse_error(no, std::string("not a CRSF: ") + e.what());
        }
        annotate(f.graph, s);
        if (j.contains("skeleton")) s.skeleton = skeleton_of(f.graph, s.out);
        if (j.value("K", -1) != s.K || j.value("K_dagger", -1) != s.K_dagger)
            throw parse_error(no, "stored K or K_dagger disagrees with the forest");
        f.samples.push_back(std::move(s));
    }
    if (!have_header) throw parse_error(no + 1, "empty sample file");
    return f;
}

SampleFile load_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_samples(in);
}

bool same_sample(const CRSFSample& a, const CRSFSample& b) {
    if (a.out != b.out || a.K != b.K || a.K_dagger != b.K_dagger || a.attempts != b.attempts) return false;
    if (a.cycles.size() != b.cycles.size()) return false;
    for (size_t i = 0; i < a.cycles.size(); ++i)
        if (a.cycles[i].darts != b.cycles[i].darts || a.cycles[i].cls != b.cycles[i].cls) return false;
    if (a.skeleton.has_value() != b.skeleton.has_value()) return false;
    if (a.skeleton && (a.skeleton->branches != b.skeleton->branches || a.skeleton->aux != b.skeleton->aux)) return false;
    return a.dual_diagnostic == b.dual_diagnostic;
}

void SuiteResult::check(const std::string& what, bool ok, nlohmann::json detail) {
    detail["name"] = what;
    detail["pass"] = ok;
    checks.push_back(std::move(detail));
    pass = pass && ok;
}

bool ExperimentRecord::pass() const {
    for (auto& s : suites)
        if (!s.pass) return false;
    return true;
}

nlohmann::json ExperimentRecord::to_json() const {
    auto suites_json = nlohmann::json::array();
    for (auto& s : suites)
        suites_json.push_back({{"name", s.name}, {"pass", s.pass}, {"stats", s.stats}, {"checks", s.checks}});
    return {{"command", command}, {"graph_hash", graph_hash}, {"seed", seed}, {"parameters", parameters},
            {"suites", suites_json}, {"pass", pass()}, {"wall_time_s", wall_time_s}};
}

namespace {

const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

}  // namespace

std::string render_svg(const SurfaceGraph& g, const CRSFSample* sample) {
    double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
    for (auto& v : g.vertices) {
        if (v.boundary) continue;
        x0 = std::min(x0, v.x), y0 = std::min(y0, v.y), x1 = std::max(x1, v.x), y1 = std::max(y1, v.y);
    }
    if (!std::isfinite(x0)) x0 = y0 = 0, x1 = y1 = 1;
    // Polygon corners: one period wide when periods are known.
    double px0 = x0 - 0.5, py0 = y0 - 0.5, px1 = x1 + 0.5, py1 = y1 + 0.5;
    if (g.periods.size() >= 2) {
        px1 = px0 + g.periods[0][0];
        py1 = py0 + g.periods[1][1];
    }
    const double scale = 60, pad = 40;
    const double W = (px1 - px0) * scale + 2 * pad, H = (py1 - py0) * scale + 2 * pad;
    auto X = [&](double x) { return num((x - px0) * scale + pad); };
    auto Y = [&](double y) { return num((py1 - y) * scale + pad); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H)
       << "\" viewBox=\"0 0 " << num(W) << ' ' << num(H) << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << num(W) << "\" height=\"" << num(H) << "\" fill=\"white\"/>\n";
    const bool periodic = g.periods.size() >= 2;
    os << "<g id=\"polygon\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"" << (periodic ? "" : " stroke-dasharray=\"6 4\"")
       << ">\n";
    os << "<polygon points=\"" << X(px0) << ',' << Y(py0) << ' ' << X(px1) << ',' << Y(py0) << ' ' << X(px1) << ','
       << Y(py1) << ' ' << X(px0) << ',' << Y(py1) << "\"/>\n</g>\n";
    os << "<g id=\"side-labels\" font-family=\"sans-serif\" font-size=\"14\">\n";
    if (periodic) {
        const double mx = (px0 + px1) / 2, my = (py0 + py1) / 2;
        os << "<text x=\"" << X(mx) << "\" y=\"" << num((py1 - py0) * scale + pad + 18) << "\">a &#8594;</text>\n";
        os << "<text x=\"" << X(mx) << "\" y=\"" << num(pad - 8) << "\">a &#8594;</text>\n";
        os << "<text x=\"" << num(pad - 30) << "\" y=\"" << Y(my) << "\">b &#8593;</text>\n";
        os << "<text x=\"" << num((px1 - px0) * scale + pad + 6) << "\" y=\"" << Y(my) << "\">b &#8593;</text>\n";
    } else {
        os << "<text x=\"" << num(pad) << "\" y=\"" << num(pad - 8) << "\">wired boundary</text>\n";
    }
    os << "</g>\n";

    os << "<g id=\"vertices\" fill=\"#444\">\n";
    for (auto& v : g.vertices)
        if (!v.boundary) os << "<circle cx=\"" << X(v.x) << "\" cy=\"" << Y(v.y) << "\" r=\"2.5\"/>\n";
    os << "</g>\n";

    auto segment = [&](int d, const std::string& style) {
        const auto& e = g.edges[d];
        const auto& t = g.vertices[e.tail];
        double hx, hy;
        if (g.is_boundary(e.head)) {
            double sx = 0, sy = 0;
            int k = 0;
            for (int o : g.all_out(e.tail))
                if (!g.is_boundary(g.edges[o].head)) {
                    const auto& w = g.vertices[g.edges[o].head];
                    auto off = word_offset(g, g.edges[o].label);
                    sx += w.x + off[0] - t.x, sy += w.y + off[1] - t.y, ++k;
                }
            double dx = k ? -sx / k : 0, dy = k ? -sy / k : 1;
            double len = std::hypot(dx, dy);
            if (len < 1e-9) dx = 0, dy = 1, len = 1;
            hx = t.x + 0.4 * dx / len, hy = t.y + 0.4 * dy / len;
        } else {
            auto off = word_offset(g, e.label);
            hx = g.vertices[e.head].x + off[0], hy = g.vertices[e.head].y + off[1];
        }
        std::string s = "<line x1=\"" + X(t.x) + "\" y1=\"" + Y(t.y) + "\" x2=\"" + X(hx) + "\" y2=\"" + Y(hy) + "\" " +
                        style + "/>\n";
        if (!g.is_boundary(e.head) && (hx != g.vertices[e.head].x || hy != g.vertices[e.head].y)) {
            // Wrapped copy entering the polygon at the head.
            const auto& h = g.vertices[e.head];
            s += "<line x1=\"" + X(h.x - (hx - t.x)) + "\" y1=\"" + Y(h.y - (hy - t.y)) + "\" x2=\"" + X(h.x) +
                 "\" y2=\"" + Y(h.y) + "\" " + style + "/>\n";
        }
        return s;
    };

    os << "<g id=\"punctures\">\n";
    for (auto& p : g.punctures) os << segment(p.edge, "stroke=\"#7b2fbf\" stroke-width=\"4\"");
    os << "</g>\n";

    if (sample && !sample->out.empty()) {
        std::vector<char> on_cycle(g.num_edges(), 0), on_skeleton(g.num_edges(), 0);
        for (auto& c : sample->cycles)
            for (int d : c.darts) on_cycle[d] = 1;
        if (sample->skeleton)
            for (auto& b : sample->skeleton->branches)
                for (int d : b) on_skeleton[d] = 1;
        os << "<g id=\"forest\">\n";
        for (int v = 0; v < g.num_vertices(); ++v) {
            int d = sample->out[v];
            if (d < 0 || on_cycle[d]) continue;
            os << segment(d, on_skeleton[d] ? "stroke=\"black\" stroke-width=\"3\""
                                            : "stroke=\"#888\" stroke-width=\"1.5\"");
        }
        os << "</g>\n";
        std::map<std::string, int> colour;
        os << "<g id=\"cycles\">\n";
        for (auto& c : sample->cycles) {
            // A class and its inverse share a colour.
            std::string a = to_string(c.cls), b = to_string(c.cls.inverse());
            std::string key = std::min(a, b);
            auto it = colour.emplace(key, static_cast<int>(colour.size())).first;
            std::string style = std::string("stroke=\"") + kPalette[it->second % 8] + "\" stroke-width=\"3.5\"";
            for (int d : c.darts) os << segment(d, style);
        }
        os << "</g>\n";
        os << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
        int row = 0;
        for (auto& [key, idx] : colour)
            os << "<text x=\"4\" y=\"" << num(14 + 14 * row++) << "\" fill=\"" << kPalette[idx % 8] << "\">class " << key
               << "</text>\n";
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace crsf
