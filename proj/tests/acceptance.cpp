#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "crsf/fixtures.hpp"
#include "crsf/suites.hpp"
#include "crsf/wilson.hpp"

using namespace crsf;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void absorb(Outcome& o, const SuiteResult& r, const std::string& label) {
    o.pass = o.pass && r.pass;
    for (auto& c : r.checks)
        if (!c["pass"].get<bool>()) o.detail += label + ": failed '" + c["name"].get<std::string>() + "' " + c.dump() + "; ";
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double stat(const SuiteResult& r, const std::string& key) { return r.stats.value(key, 0.0); }

Outcome c1() {
    Outcome o;
    SuiteOptions opt;
    double worst = 0;
    for (auto [label, g] : {std::pair{"chain", make_chain()}, std::pair{"grid4", make_wired_grid(4)}}) {
        auto r = suite_density_exit(g, opt);
        absorb(o, r, label);
        worst = std::max(worst, stat(r, "max_rel_error"));
    }
    o.detail += "max rel error " + fmt("%.2e", worst);
    return o;
}

Outcome c2() {
    Outcome o;
    SuiteOptions opt;
    double worst = 0;
    for (auto [label, g] : {std::pair{"torus2", make_torus_grid(2, 2)}, std::pair{"torus3", make_torus_grid(3, 3)},
                            std::pair{"holed3", make_holed_torus(3, 0, {0, 1})}}) {
        auto r = suite_density_surface(g, opt);
        absorb(o, r, label);
        worst = std::max({worst, stat(r, "max_rel_error"), stat(r, "max_rel_error_pairs")});
    }
    o.detail += "max rel error " + fmt("%.2e", worst);
    return o;
}

Outcome c3() {
    Outcome o;
    SuiteOptions opt;
    auto r = suite_pair_rn(make_wired_grid(4), opt);
    absorb(o, r, "grid4");
    o.detail += std::to_string(r.stats.value("pairs", 0)) + " pairs, max rel error " + fmt("%.2e", stat(r, "max_rel_error"));
    return o;
}

Outcome c4() {
    Outcome o;
    SuiteOptions opt;
    double band_gap = -1, band_width = 0;
    for (auto [label, g] : {std::pair{"chain", make_chain()}, std::pair{"grid4", make_wired_grid(4)},
                            std::pair{"torus2", make_torus_grid(2, 2)}, std::pair{"torus3", make_torus_grid(3, 3)},
                            std::pair{"holed3", make_holed_torus(3, 0, {0, 1})}}) {
        auto r = suite_marginals(g, opt);
        absorb(o, r, label);
        if (r.stats.contains("skeleton_band") && r.stats["skeleton_band"].is_object()) {
            band_gap = r.stats["skeleton_band"]["max_log_gap"];
            band_width = r.stats["skeleton_band"]["log_width"];
        }
    }
    if (band_gap < 0) {
        o.pass = false;
        o.detail += "surface band not evaluated; ";
    }
    o.detail += "band log gap " + fmt("%.2e", band_gap) + " within width " + fmt("%.3f", band_width);
    return o;
}

Outcome c5() {
    Outcome o;
    SuiteOptions opt;
    opt.seed = 5;
    opt.samples = 100'000;
    auto r = suite_loop_soup(make_wired_grid(5), opt);
    absorb(o, r, "grid5");
    o.detail += "max z " + fmt("%.2f", stat(r, "max_z")) + ", dispersion in [" + fmt("%.3f", stat(r, "dispersion_min")) +
                ", " + fmt("%.3f", stat(r, "dispersion_max")) + "]";
    return o;
}

Outcome c6() {
    Outcome o;
    SuiteOptions opt;
    opt.seed = 6;
    opt.samples = 100'000;
    auto r = suite_temperleyan(make_torus_grid(2, 2), opt);
    absorb(o, r, "torus2");
    const auto& t = r.stats["exact_table"];
    double zp = 0;
    for (auto& row : r.stats["ptemp"]) zp = std::max(zp, row["z"].get<double>());
    o.detail += "max z wwils " + fmt("%.2f", t.value("max_z_wwils", -1.0)) + ", wils " +
                fmt("%.2f", t.value("max_z_wils", -1.0)) + ", ptemp " + fmt("%.2f", zp);
    return o;
}

Outcome c7() {
    Outcome o;
    SuiteOptions opt;
    auto r = suite_pairchain(make_wired_disc(2.0), opt);
    absorb(o, r, "disc2");
    o.detail += "transition rel error " + fmt("%.2e", stat(r, "max_rel_error_transition")) + ", sum error " +
                fmt("%.2e", stat(r, "max_sum_error"));
    return o;
}

Outcome c8() {
    Outcome o;
    auto holed = make_holed_torus(3, 0, {0, 1});
    auto temp = sample_batch(holed, Law::wils, 1000, 81);
    long long not_temp = 0;
    for (auto& s : temp) not_temp += !is_temperleyan(holed, skeleton_of(holed, s.out));
    if (not_temp) o.pass = false, o.detail += std::to_string(not_temp) + " non-Temperleyan samples; ";

    std::vector<double> moments;
    for (int n : {8, 16, 32}) {
        auto g = make_torus_grid(n, n);
        const long long N = 2000;
        auto batch = sample_batch(g, Law::wwils, N, 80 + static_cast<std::uint64_t>(n));
        long long bad = 0;
        int kmax = 0;
        double s = 0, s2 = 0;
        for (auto& x : batch) {
            std::set<int> seen;
            bool ok = !x.cycles.empty();
            for (auto& c : x.cycles) {
                ok = ok && is_primitive(c.cls) && same_class_up_to_sign(c.cls, x.cycles.front().cls);
                for (int d : c.darts) ok = ok && seen.insert(g.edges[d].tail).second;
            }
            bad += !ok;
            kmax = std::max(kmax, x.K);
            double w = std::ldexp(1.0, x.K);
            s += w, s2 += w * w;
        }
        if (bad) o.pass = false, o.detail += "torus" + std::to_string(n) + ": " + std::to_string(bad) + " bad cycle sets; ";
        double prev = INFINITY;
        for (int k = 0; k <= kmax; ++k) {
            double c = 0;
            for (auto& x : batch) c += x.K > k;
            double p = c / N;
            if (p > 0 && !(p < prev)) {
                o.pass = false;
                o.detail += "torus" + std::to_string(n) + ": K tail not decreasing at " + std::to_string(k) + "; ";
            }
            prev = p;
        }
        auto e = mean_estimate(s, s2, N);
        if (!std::isfinite(e.mean) || !std::isfinite(e.se)) o.pass = false, o.detail += "moment not finite; ";
        moments.push_back(e.mean);
    }
    for (size_t i = 1; i < moments.size(); ++i)
        if (std::abs(moments[i] - moments[i - 1]) > 0.1 * moments[i - 1]) {
            o.pass = false;
            o.detail += "E[2^K] moved by more than 10% under refinement; ";
        }
    o.detail += "E[2^K] at n=8,16,32: " + fmt("%.4f", moments[0]) + ", " + fmt("%.4f", moments[1]) + ", " +
                fmt("%.4f", moments[2]);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"C1 exit-density identity on chain and 4x4 grid", c1},
        {"C2 surface density identity on tori and holed torus", c2},
        {"C3 pair law equals loop-weighted product", c3},
        {"C4 marginal identities and surface band", c4},
        {"C5 Wilson loops match the loop soup", c5},
        {"C6 CRSF laws on the 2x2 torus", c6},
        {"C7 path-pair chain on a two-scale disc", c7},
        {"C8 topology of samples and K statistics", c8},
    };
    int failed = 0;
    for (auto& [name, run] : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s (%s; %.1fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
