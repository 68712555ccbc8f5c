#include <algorithm>
#include <sstream>

#include "doctest.h"

#include "crsf/fixtures.hpp"
#include "crsf/io.hpp"
#include "crsf/wilson.hpp"

using namespace crsf;

TEST_CASE("graph text round trips byte for byte") {
    for (const auto& g : {make_chain(), make_torus_grid(3, 3), make_holed_torus(3, 0, {0, 1}), make_wired_disc(2.0)}) {
        std::string text = write_graph(g);
        CHECK(write_graph(read_graph(text)) == text);
        CHECK(graph_hash(read_graph(text)) == graph_hash(g));
    }
}

TEST_CASE("bundled data matches the fixtures") {
    std::string dir = CRSF_DATA_DIR;
    CHECK(graph_hash(load_graph(dir + "/torus2.graph")) == graph_hash(make_torus_grid(2, 2)));
    CHECK(graph_hash(load_graph(dir + "/grid4.graph")) == graph_hash(make_wired_grid(4)));
}

TEST_CASE("samples round trip") {
    auto g = make_holed_torus(3, 0, {0, 1});
    auto batch = sample_batch(g, Law::wwils, 20, 3);
    std::stringstream ss;
    write_samples(ss, sample_header(g, "wwils", 3, 20), batch, false);
    auto back = read_samples(ss);
    REQUIRE(back.samples.size() == batch.size());
    for (size_t i = 0; i < batch.size(); ++i) CHECK(same_sample(batch[i], back.samples[i]));
    CHECK(graph_hash(back.graph) == graph_hash(g));
}

TEST_CASE("parse errors carry line numbers") {
    std::string text = write_graph(make_chain());
    auto line_of_error = [](const std::string& t) {
        try {
            read_graph(t);
        } catch (const parse_error& e) {
            return e.line;
        }
        return 0;
    };
    CHECK(line_of_error("crsf-graph 2\n") == 1);
    std::string broken = text;
    auto pos = broken.find("darts");
    auto eol = broken.find('\n', pos);
    int line = 1 + static_cast<int>(std::count(broken.begin(), broken.begin() + static_cast<long>(eol), '\n')) + 1;
    auto eol2 = broken.find('\n', eol + 1);
    broken.replace(eol + 1, eol2 - eol - 1, "0 1 nonsense 0 1 0");
    CHECK(line_of_error(broken) == line);
}

TEST_CASE("render without a sample draws only the polygon") {
    auto svg = render_svg(make_torus_grid(2, 2), nullptr);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polygon") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<line") == std::string::npos);
}
