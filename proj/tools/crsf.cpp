#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "crsf/fixtures.hpp"
#include "crsf/io.hpp"
#include "crsf/suites.hpp"
#include "crsf/wilson.hpp"

using namespace crsf;

namespace {

std::vector<double> parse_list(const std::string& text, size_t n, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    if (v.size() != n) throw std::invalid_argument(what + " needs " + std::to_string(n) + " comma-separated numbers");
    return v;
}

Law parse_law(const std::string& s) {
    if (s == "wwils") return Law::wwils;
    if (s == "wils") return Law::wils;
    if (s == "temp") return Law::temp;
    throw std::invalid_argument("unknown law '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cycle-rooted spanning forests on surface graphs: sampling, exact laws and checks"};
    app.require_subcommand(1);

    std::string graph_path, out_path, law = "wwils", suite, metric, sample_path, fixture = "torus";
    std::uint64_t seed = 0;
    long long n = 1000, samples = -1;
    int max_attempts = 100000, size = 4, nx = 0, ny = 0, hole = 0, index = 0;
    double radius = 2.0, q = 2;
    std::string puncture = "0,1", rect, start, target;

    auto* gen = app.add_subcommand("generate", "Write a built-in fixture graph");
    gen->add_option("--fixture", fixture, "torus | holed-torus | wired-grid | wired-disc | chain | annulus")
        ->check(CLI::IsMember({"torus", "holed-torus", "wired-grid", "wired-disc", "chain", "annulus"}));
    gen->add_option("--n", size, "Grid side or ring length");
    gen->add_option("--nx", nx, "Torus width (defaults to --n)");
    gen->add_option("--ny", ny, "Torus height (defaults to --n)");
    gen->add_option("--hole-radius", hole, "Holed torus: hole radius");
    gen->add_option("--puncture", puncture, "Holed torus: lower-left corner i,j of the punctured face");
    gen->add_option("--radius", radius, "Wired disc radius");
    gen->add_option("--out", out_path, "Output graph file")->required();

    auto* smp = app.add_subcommand("sample", "Sample CRSFs");
    smp->add_option("--graph", graph_path)->required()->check(CLI::ExistingFile);
    smp->add_option("--law", law)->check(CLI::IsMember({"wwils", "wils", "temp"}));
    smp->add_option("--n", n)->check(CLI::PositiveNumber);
    smp->add_option("--seed", seed)->required();
    smp->add_option("--out", out_path)->required();
    smp->add_option("--max-attempts", max_attempts)->check(CLI::PositiveNumber);

    auto* ver = app.add_subcommand("verify", "Run a verification suite");
    ver->add_option("--suite", suite)->required()->check(CLI::IsMember(suite_names()));
    ver->add_option("--graph", graph_path)->required()->check(CLI::ExistingFile);
    ver->add_option("--seed", seed)->required();
    ver->add_option("--samples", samples, "Monte Carlo sample count");
    ver->add_option("--record", out_path, "Write the experiment record here");

    auto* sts = app.add_subcommand("stats", "Empirical statistics with confidence intervals");
    sts->add_option("--metric", metric)->required()->check(CLI::IsMember({"K-tail", "qK-moment", "cycle-classes", "crossing"}));
    sts->add_option("--graph", graph_path)->required()->check(CLI::ExistingFile);
    sts->add_option("--n", n)->check(CLI::PositiveNumber);
    sts->add_option("--seed", seed)->required();
    sts->add_option("--law", law)->check(CLI::IsMember({"wwils", "wils", "temp"}));
    sts->add_option("--q", q, "Base of the moment E[q^K]");
    sts->add_option("--rect", rect, "crossing: x0,y0,x1,y1");
    sts->add_option("--start", start, "crossing: x,y,r");
    sts->add_option("--target", target, "crossing: x,y,r");

    auto* ren = app.add_subcommand("render", "Draw a sample as SVG");
    ren->add_option("--sample", sample_path)->required()->check(CLI::ExistingFile);
    ren->add_option("--index", index, "Sample index in the file");
    ren->add_option("--out", out_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            SurfaceGraph g;
            if (fixture == "torus") {
                g = make_torus_grid(nx ? nx : size, ny ? ny : size);
            } else if (fixture == "holed-torus") {
                auto p = parse_list(puncture, 2, "--puncture");
                g = make_holed_torus(size, hole, {static_cast<int>(p[0]), static_cast<int>(p[1])});
            } else if (fixture == "wired-grid") {
                g = make_wired_grid(size);
            } else if (fixture == "wired-disc") {
                g = make_wired_disc(radius);
            } else if (fixture == "chain") {
                g = make_chain();
            } else {
                g = make_annulus_ring(size);
            }
            save_graph(g, out_path);
            std::cout << nlohmann::json{{"graph", out_path}, {"graph_hash", graph_hash(g)}, {"vertices", g.num_vertices()}}.dump()
                      << '\n';
            return 0;
        }
        if (smp->parsed()) {
            auto g = load_graph(graph_path);
            auto t0 = std::chrono::steady_clock::now();
            auto batch = sample_batch(g, parse_law(law), n, seed, max_attempts);
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::ofstream os(out_path);
            if (!os) throw std::runtime_error("cannot write " + out_path);
            write_samples(os, sample_header(g, law, seed, n), batch, law == "temp");
            long long attempts = 0;
            for (auto& s : batch) attempts += s.attempts;
            std::cout << nlohmann::json{{"samples", n}, {"law", law}, {"seed", seed},
                                        {"acceptance_rate", static_cast<double>(n) / static_cast<double>(attempts)},
                                        {"wall_time_s", secs}, {"out", out_path}}.dump()
                      << '\n';
            return 0;
        }
        if (ver->parsed()) {
            auto g = load_graph(graph_path);
            SuiteOptions opt;
            opt.seed = seed;
            if (samples > 0) opt.samples = samples;
            auto t0 = std::chrono::steady_clock::now();
            ExperimentRecord rec;
            rec.command = "verify";
            rec.graph_hash = graph_hash(g);
            rec.seed = seed;
            rec.parameters = {{"suite", suite}, {"samples", opt.samples}, {"tol", opt.tol}};
            rec.suites.push_back(run_suite(suite, g, opt));
            rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            auto j = rec.to_json();
            if (!out_path.empty()) {
                std::ofstream os(out_path);
                os << j.dump(2) << '\n';
            }
            std::cout << j.dump(2) << '\n';
            return rec.pass() ? 0 : 1;
        }
        if (sts->parsed()) {
            auto g = load_graph(graph_path);
            StatsOptions opt;
            opt.law = law;
            opt.n = n;
            opt.seed = seed;
            opt.q = q;
            if (metric == "crossing") {
                if (rect.empty() || start.empty() || target.empty())
                    throw std::invalid_argument("crossing needs --rect, --start and --target");
                auto a = parse_list(rect, 4, "--rect"), b = parse_list(start, 3, "--start"), c = parse_list(target, 3, "--target");
                opt.has_crossing = true;
                opt.crossing = {a[0], a[1], a[2], a[3], b[0], b[1], b[2], c[0], c[1], c[2]};
            }
            std::cout << run_stats(metric, g, opt).dump(2) << '\n';
            return 0;
        }
        if (ren->parsed()) {
            auto f = load_samples(sample_path);
            const CRSFSample* s = nullptr;
            if (!f.samples.empty()) {
                if (index < 0 || index >= static_cast<int>(f.samples.size()))
                    throw std::invalid_argument("sample index out of range");
                s = &f.samples[index];
            }
            std::ofstream os(out_path);
            if (!os) throw std::runtime_error("cannot write " + out_path);
            os << render_svg(f.graph, s);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
