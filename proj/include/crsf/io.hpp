#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "crsf/surface.hpp"

namespace crsf {

struct parse_error : std::runtime_error {
    int line;
    parse_error(int line_no, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

// Line-oriented text format, version 1:
//   crsf-graph 1
//   surface <genus> <boundary> <planar>
//   vertices <n>        then n lines: x y boundary
//   darts <m>           then m lines: tail head weight label twin aux
//   faces <k>           then k lines: disc len d_1 ... d_len
//   punctures <p>       then p lines: face u v dart
//   periods <r>         then r lines: x y
//   end
// Blank lines and text after '#' are ignored.
std::string write_graph(const SurfaceGraph& g);
SurfaceGraph read_graph(const std::string& text);
SurfaceGraph load_graph(const std::string& path);
void save_graph(const SurfaceGraph& g, const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string graph_hash(const SurfaceGraph& g);

// Samples as JSON lines: a header carrying the graph, then one record per
// sample.
struct SampleFile {
    SurfaceGraph graph;
    nlohmann::json header;
    std::vector<CRSFSample> samples;
};

nlohmann::json sample_header(const SurfaceGraph& g, const std::string& law, std::uint64_t seed, long long n);
nlohmann::json sample_to_json(const CRSFSample& s, long long index, bool with_weight);
void write_samples(std::ostream& os, const nlohmann::json& header,
                   const std::vector<CRSFSample>& samples, bool with_weight);
SampleFile read_samples(std::istream& is);
SampleFile load_samples(const std::string& path);

bool same_sample(const CRSFSample& a, const CRSFSample& b);

struct SuiteResult {
    std::string name;
    bool pass = true;
    nlohmann::json stats = nlohmann::json::object();
    nlohmann::json checks = nlohmann::json::array();

    void check(const std::string& what, bool ok, nlohmann::json detail = nlohmann::json::object());
};

struct ExperimentRecord {
    std::string command;
    std::string graph_hash;
    std::uint64_t seed = 0;
    nlohmann::json parameters = nlohmann::json::object();
    std::vector<SuiteResult> suites;
    double wall_time_s = 0;

    bool pass() const;
    nlohmann::json to_json() const;
};

// Fundamental polygon with side labels, forest edges, cycles coloured by
// homotopy class, punctures and skeleton branches emphasised.
std::string render_svg(const SurfaceGraph& g, const CRSFSample* sample);

}  // namespace crsf
