// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail N]... [--only N]...
//
// Exit status is 0 when every criterion matches its expectation. A criterion
// listed with --expect-fail must fail; if it passes the run fails, so the
// expectation cannot go stale silently.

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "covert/analytics.hpp"
#include "covert/bessel.hpp"
#include "covert/cli.hpp"
#include "covert/errors.hpp"
#include "covert/model.hpp"
#include "covert/optimizer.hpp"
#include "covert/rng.hpp"
#include "covert/simulator.hpp"
#include "covert/verify.hpp"

using namespace covert;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    }
    return v;
}

SystemConfig at_dbm(double dbm) {
    SystemConfig cfg;
    cfg.p_max = dbm_to_mw(dbm);
    return cfg;
}

// A random configuration with a threshold bracket. With `feasible` set the
// point must also pass the optimizer's feasibility test.
struct Draw {
    SystemConfig cfg;
    double q_c = 0.0;
    std::int64_t l_d = 0;
    DerivedConstants dc;
};

Draw random_draw(std::mt19937_64& gen, bool feasible) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        Draw d;
        d.cfg.p_max = dbm_to_mw(4.0 + 20.0 * u(gen));
        d.cfg.n0 = dbm_to_mw(-3.0 + 3.0 * u(gen));
        d.cfg.l_t = 5 + static_cast<std::int64_t>(20 * u(gen));
        d.cfg.l_f = 5 + static_cast<std::int64_t>(20 * u(gen));
        d.cfg.f_ar = 2.0 + 18.0 * u(gen);
        d.cfg.f_rb = 2.0 + 18.0 * u(gen);
        d.cfg.epsilon = 0.05 + 0.2 * u(gen);
        const std::int64_t l_max = max_data_symbols(d.cfg);
        if (l_max < 1) {
            continue;
        }
        d.l_d = 1 + static_cast<std::int64_t>(u(gen) * static_cast<double>(l_max));
        d.l_d = std::min(d.l_d, l_max);
        const QcBounds b = qc_bounds(d.cfg, d.l_d);
        if (!b.feasible) {
            continue;
        }
        d.q_c = b.q_min + (b.q_max - b.q_min) * (0.02 + 0.96 * u(gen));
        d.dc = derive_constants(d.cfg, d.q_c, d.l_d);
        try {
            tau_bounds(d.dc);
        } catch (const Infeasible&) {
            continue;
        }
        if (feasible && !evaluate_point(d.cfg, d.q_c, d.l_d, OptimizerSettings{}).feasible) {
            continue;
        }
        return d;
    }
}

// 1 ---------------------------------------------------------------------
Outcome psi_anchor() {
    const PsiConstants p = compute_psi_constants(1e-9);
    const double j2 = std::pow(bessel_j0(p.psi1), 2);
    const bool ok = p.psi0 >= 1.6908 && p.psi0 <= 1.6928 && j2 >= 0.161 && j2 <= 0.163;
    return {ok, fmt::format("psi0={:.6f} psi1={:.6f} J0^2(psi1)={:.6f}", p.psi0, p.psi1, j2)};
}

// 2 ---------------------------------------------------------------------
Outcome closed_form_vs_quadrature() {
    std::mt19937_64 gen(2002);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_psu = 0.0;
    double worst_md = 0.0;
    int equal = 0;
    for (int i = 0; i < 25; ++i) {
        Draw d = random_draw(gen, false);
        DerivedConstants dc = d.dc;
        if (i % 3 == 0) {
            // Pick the correlation that makes the aging and estimation rates
            // coincide on both hops.
            const double beta = dc.beta_star;
            const double rho = std::sqrt(1.0 - beta / (1.0 - beta));
            dc = derive_constants_with_rho(d.cfg, d.q_c, d.l_d, rho, rho);
            ++equal;
        }
        worst_psu = std::max(worst_psu, std::abs(success_probability(dc) -
                                                 verify::success_probability_quadrature(dc)));
        const TauBounds b = tau_bounds(dc);
        for (double f : {0.05, 0.5, 2.0}) {
            const double tau = b.tau_min + f * (b.tau_max - b.tau_min) * (0.5 + u(gen));
            worst_md = std::max(worst_md, std::abs(miss_detection(dc, tau) -
                                                   verify::miss_detection_quadrature(dc, tau)));
        }
    }
    return {worst_psu <= 1e-6 && worst_md <= 1e-6,
            fmt::format("max|dP_su|={:.2e} max|dP_MD|={:.2e} ({} of 25 draws on the equal-rate branch)",
                        worst_psu, worst_md, equal)};
}

// 3 ---------------------------------------------------------------------
Outcome success_vs_simulation() {
    const SystemConfig cfg = at_dbm(20.0);
    int inside = 0;
    int total = 0;
    double worst = 0.0;
    std::uint64_t stream = 0;
    for (std::int64_t l_d : {100, 200}) {
        const QcBounds b = qc_bounds(cfg, l_d);
        for (int i = 1; i <= 10; ++i) {
            const double q = b.q_min + (b.q_max - b.q_min) * i / 10.0;
            const double p = success_probability(derive_constants(cfg, q, l_d));
            TrialConfig t;
            t.n_blocks = 100000;
            t.seed = substream_seed(3003, stream++);
            const SimulationReport r = run_trials(cfg, q, l_d, 0.0, t);
            const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(r.n_h1));
            const double err = std::abs(r.p_su_hat - p);
            worst = std::max(worst, err);
            inside += err <= std::max(0.01, 3.0 * sigma);
            ++total;
        }
    }
    return {inside >= 0.95 * total,
            fmt::format("{}/{} points within max(0.01, 3 sigma); worst |error|={:.4f}", inside,
                        total, worst)};
}

// 4 ---------------------------------------------------------------------
Outcome dep_vs_simulation() {
    int inside = 0;
    int total = 0;
    double minimum[2] = {0.0, 0.0};
    int k = 0;
    std::uint64_t stream = 0;
    for (double dbm : {12.0, 20.0}) {
        const SystemConfig cfg = at_dbm(dbm);
        const DerivedConstants dc = derive_constants(cfg, 5.0, 100);
        const TauBounds b = tau_bounds(dc);
        for (double tau : linspace(0.9 * b.tau_min, b.tau_min + 4.0 * (b.tau_max - b.tau_min), 20)) {
            const double xi = dep(dc, tau);
            TrialConfig t;
            t.n_blocks = 100000;
            t.seed = substream_seed(4004, stream++);
            const SimulationReport r = run_trials(cfg, 5.0, 100, tau, t);
            const double sigma = std::sqrt(xi * (1.0 - xi) / static_cast<double>(t.n_blocks));
            inside += std::abs(r.xi_hat - xi) <= std::max(0.01, 3.0 * sigma);
            ++total;
        }
        minimum[k++] = minimum_dep(dc).xi_lb_star;
    }
    const bool ordered = minimum[1] < minimum[0];
    return {inside >= 0.95 * total && ordered,
            fmt::format("{}/{} points within max(0.01, 3 sigma); min xi 12 dBm={:.4f} 20 dBm={:.4f}",
                        inside, total, minimum[0], minimum[1])};
}

// 5 ---------------------------------------------------------------------
Outcome bound_tightness() {
    bool ok = true;
    std::string detail;
    for (double dbm : {12.0, 20.0}) {
        const DerivedConstants dc = derive_constants(at_dbm(dbm), 5.0, 100);
        const TauBounds b = tau_bounds(dc);
        double worst_gap = -1.0;
        for (double tau : linspace(b.tau_min, b.tau_min + 10.0 * (b.tau_max - b.tau_min), 512)) {
            worst_gap = std::max(worst_gap, dep_lower_bound(dc, tau) - dep(dc, tau));
        }
        const TauOptimum lb = optimal_tau(dc);
        const TauOptimum best = minimum_dep(dc);
        const double excess = dep(dc, lb.tau_star) - best.xi_lb_star;
        ok = ok && worst_gap <= 1e-12 && excess <= 0.02;
        detail += fmt::format("{}{:.0f} dBm: max(xi_lb - xi)={:.2e} excess={:.4f}",
                              detail.empty() ? "" : "; ", dbm, worst_gap, excess);
    }
    return {ok, detail};
}

// 6 ---------------------------------------------------------------------
Outcome bracket_correctness() {
    std::mt19937_64 gen(6006);
    int located = 0;
    int monotone = 0;
    double worst_ratio = 0.0;
    for (int i = 0; i < 25; ++i) {
        const Draw d = random_draw(gen, true);
        const TauBounds b = tau_bounds(d.dc);
        const auto grid = linspace(b.tau_min, 10.0 * b.tau_max, 20001);
        std::size_t arg = 0;
        double prev = dep_lower_bound(d.dc, grid[0]);
        double best = prev;
        bool rising = true;
        for (std::size_t j = 1; j < grid.size(); ++j) {
            const double v = dep_lower_bound(d.dc, grid[j]);
            if (v < best) {
                best = v;
                arg = j;
            }
            if (grid[j - 1] > b.tau_max && v < prev - 1e-12) {
                rising = false;
            }
            prev = v;
        }
        located += grid[arg] <= b.tau_max;
        monotone += rising;
        worst_ratio = std::max(worst_ratio, grid[arg] / b.tau_max);
    }
    return {located == 25 && monotone == 25,
            fmt::format("minimizer inside bracket {}/25; non-decreasing past tau_max {}/25; "
                        "largest argmin/tau_max={:.2f}",
                        located, monotone, worst_ratio)};
}

// 7 ---------------------------------------------------------------------
Outcome asymptote() {
    std::mt19937_64 gen(7007);
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
        const Draw d = random_draw(gen, false);
        const TauBounds b = tau_bounds(d.dc);
        worst = std::max(worst, std::abs(dep(d.dc, 100.0 * b.tau_max) - d.dc.theta));
    }
    return {worst < 1e-3, fmt::format("max|xi(100 tau_max) - theta|={:.2e}", worst)};
}

// 8 ---------------------------------------------------------------------
Outcome branch_continuity() {
    std::mt19937_64 gen(8008);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
        const double lambda2 = std::pow(10.0, -3.0 + 3.0 * u(gen));
        const double lambda3 = 1.0 + 0.1 * u(gen);
        const double phi1 = 0.01 + 0.5 * u(gen);
        const double snr = std::pow(10.0, -1.0 + 3.0 * u(gen));
        const double equal = hop_success_probability(lambda2, lambda2, lambda3, phi1, snr);
        // 1e-6 itself sits on the equal-rate side of the switch; the larger
        // offsets exercise the distinct-rate formula just past it.
        for (double delta : {1e-6, 2e-6, 1e-5}) {
            const double near =
                hop_success_probability(lambda2 * (1.0 + delta), lambda2, lambda3, phi1, snr);
            worst = std::max(worst, std::abs(near - equal));
        }
    }
    return {worst < 1e-4, fmt::format("max|P(1+delta) - P(equal)|={:.2e}", worst)};
}

// 9 ---------------------------------------------------------------------
Outcome monotonicity() {
    int violations = 0;
    int checks = 0;
    auto expect = [&](bool c) {
        violations += !c;
        ++checks;
    };
    for (double dbm : {8.0, 12.0, 20.0, 24.0}) {
        const SystemConfig cfg = at_dbm(dbm);
        const std::int64_t l_max = max_data_symbols(cfg);
        for (std::int64_t l_d : {std::int64_t{1}, std::int64_t{100}, l_max}) {
            const QcBounds b = qc_bounds(cfg, l_d);
            double prev_p = -1.0;
            double prev_theta = 2.0;
            for (double q : linspace(b.q_max / 50.0, b.q_max, 50)) {
                const DerivedConstants dc = derive_constants(cfg, q, l_d);
                const double p = success_probability(dc);
                expect(p >= prev_p);
                expect(dc.theta < prev_theta);
                prev_p = p;
                prev_theta = dc.theta;
            }
        }
        for (double q : {2.0, 10.0, 40.0}) {
            double prev = 2.0;
            for (std::int64_t l_d = 1; l_d <= l_max; ++l_d) {
                const double p = success_probability(derive_constants(cfg, q, l_d));
                expect(p <= prev);
                prev = p;
            }
        }
        const DerivedConstants dc = derive_constants(cfg, 5.0, 100);
        try {
            const TauBounds b = tau_bounds(dc);
            double fa = 2.0;
            double md = -1.0;
            for (double tau : linspace(0.0, b.tau_min + 20.0 * (b.tau_max - b.tau_min), 2000)) {
                const double f = false_alarm(dc, tau);
                const double m = miss_detection(dc, tau);
                expect(f <= fa);
                expect(m >= md);
                fa = f;
                md = m;
            }
        } catch (const Infeasible&) {
        }
    }
    return {violations == 0, fmt::format("{} violations in {} comparisons", violations, checks)};
}

// 10 --------------------------------------------------------------------
bool recheck(const SystemConfig& cfg, double q_c, std::int64_t l_d, double cr) {
    const QcBounds q = qc_bounds(cfg, l_d);
    if (!(q_c > q.q_min && q_c <= q.q_max) || l_d < 1 || l_d > max_data_symbols(cfg)) {
        return false;
    }
    const DerivedConstants dc = derive_constants(cfg, q_c, l_d);
    const TauBounds b = tau_bounds(dc);
    double best = 2.0;
    for (double tau : linspace(b.tau_min, b.tau_max, 20001)) {
        best = std::min(best, dep_lower_bound(dc, tau));
    }
    const double floor = std::min(dc.theta, 1.0 - dc.theta) - cfg.epsilon;
    const double rate = covert_rate(dc, success_probability(dc), cfg.r_ab);
    return best >= floor - 1e-9 && std::abs(rate - cr) <= 1e-12 * std::max(1.0, cr);
}

Outcome optimizer_correctness() {
    const SystemConfig cfg = at_dbm(20.0);
    const OptimizerSettings s;
    const OptimizationResult a = alternate(cfg, s);
    const OptimizationResult e = exhaustive_2d(cfg, s);

    // One grid cell: the largest rate change between the exhaustive optimum
    // and any of its grid neighbours.
    double cell = 0.0;
    for (std::int64_t dl = -1; dl <= 1; ++dl) {
        const std::int64_t l = e.l_d_star + dl;
        if (l < 1 || l > max_data_symbols(cfg)) {
            continue;
        }
        const auto grid = qc_grid(cfg, l, s);
        const auto near = std::lower_bound(grid.begin(), grid.end(), e.q_c_star);
        const auto at = static_cast<std::ptrdiff_t>(near - grid.begin());
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, at - 1);
             k <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(grid.size()) - 1, at + 1); ++k) {
            cell = std::max(cell, std::abs(e.cr_star - evaluate_point(cfg, grid[static_cast<std::size_t>(k)], l, s).cr));
        }
    }
    const bool close = a.feasible && e.feasible && e.cr_star - a.cr_star <= cell + 1e-12;

    bool trace_ok = true;
    for (std::size_t i = 1; i < a.trace.size(); ++i) {
        trace_ok = trace_ok && a.trace[i].cr >= a.trace[i - 1].cr;
    }
    const bool verified = recheck(cfg, a.q_c_star, a.l_d_star, a.cr_star);

    std::vector<double> curve;
    for (double dbm : {4.0, 8.0, 12.0, 16.0, 20.0, 24.0}) {
        curve.push_back(alternate(at_dbm(dbm), s).cr_star);
    }
    const bool shape = std::is_sorted(curve.begin(), curve.end());

    std::string curve_text;
    for (double v : curve) {
        curve_text += fmt::format("{}{:.4f}", curve_text.empty() ? "" : " ", v);
    }
    return {close && trace_ok && verified && shape,
            fmt::format("alternate CR={:.6f} (q_c={:.4f}, L_d={}) exhaustive CR={:.6f} "
                        "(q_c={:.4f}, L_d={}) cell={:.2e}; trace {}; recheck {}; CR* by P_max: {}",
                        a.cr_star, a.q_c_star, a.l_d_star, e.cr_star, e.q_c_star, e.l_d_star,
                        cell, trace_ok ? "non-decreasing" : "decreasing",
                        verified ? "ok" : "failed", curve_text)};
}

// 11 --------------------------------------------------------------------
std::string snapshot(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        all += f.filename().string() + "\n" + s.str();
    }
    return all;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() /
                          fmt::format("covert_acceptance_{}", std::random_device{}());
    fs::create_directories(root);
    const std::vector<std::vector<std::string>> manifests = {
        {"sweep", "--set", "sweep.kind=psu_qc", "--set", "sweep.start=2", "--set", "sweep.stop=80",
         "--set", "sweep.points=10", "--set", "sweep.simulate=true", "--set",
         "sweep.n_blocks=20000", "--seed", "11"},
        {"sweep", "--set", "sweep.kind=dep_tau", "--set", "sweep.start=10", "--set",
         "sweep.stop=40", "--set", "sweep.points=8", "--set", "sweep.simulate=true", "--set",
         "sweep.n_blocks=20000", "--seed", "12"},
        {"simulate", "--set", "simulate.n_blocks=50000", "--seed", "13"},
        {"analyze"},
        {"optimize"},
        {"sweep", "--set", "sweep.kind=crstar_pmax", "--set", "sweep.start=8", "--set",
         "sweep.stop=20", "--set", "sweep.points=4"},
    };
    int identical = 0;
    int k = 0;
    for (const auto& base : manifests) {
        std::vector<std::string> shots;
        for (const char* jobs : {"1", "1", "8"}) {
            const fs::path out = root / fmt::format("{}_{}", k++, jobs);
            auto args = base;
            args.insert(args.end(), {"--out", out.string(), "--jobs", jobs});
            std::ostringstream sink;
            if (cli::run_cli(args, sink, sink) != cli::kOk) {
                shots.push_back(fmt::format("failed run {}", k));
                continue;
            }
            shots.push_back(snapshot(out));
        }
        identical += shots[0] == shots[1] && shots[0] == shots[2];
    }
    fs::remove_all(root);
    const int total = static_cast<int>(manifests.size());
    return {identical == total,
            fmt::format("{}/{} manifests byte-identical across two runs and --jobs 1 vs 8",
                        identical, total)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> expect_fail;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if ((a == "--expect-fail" || a == "--only") && i + 1 < argc) {
            (a == "--only" ? only : expect_fail).insert(std::atoi(argv[++i]));
        } else {
            fmt::print(stderr, "usage: acceptance [--expect-fail N]... [--only N]...\n");
            return 2;
        }
    }

    const std::vector<Criterion> criteria = {
        {1, "psi-constant anchor", 1.0, psi_anchor},
        {2, "closed form vs quadrature", 120.0, closed_form_vs_quadrature},
        {3, "success probability vs Monte Carlo", 300.0, success_vs_simulation},
        {4, "DEP vs Monte Carlo", 300.0, dep_vs_simulation},
        {5, "lower-bound tightness", 30.0, bound_tightness},
        {6, "threshold bracket", 60.0, bracket_correctness},
        {7, "DEP asymptote", 10.0, asymptote},
        {8, "branch continuity", 10.0, branch_continuity},
        {9, "monotonicity", 30.0, monotonicity},
        {10, "optimizer", 600.0, optimizer_correctness},
        {11, "determinism", 120.0, determinism},
    };

    int unexpected = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && !only.contains(c.id)) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& ex) {
            o = {false, fmt::format("exception: {}", ex.what())};
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = elapsed <= c.budget_s;
        const bool pass = o.pass && in_time;
        const bool expected_fail = expect_fail.contains(c.id);
        fmt::print("{} {:>2} {} ({:.2f} s of {:.0f} s){}: {}\n", pass ? "PASS" : "FAIL", c.id,
                   c.name, elapsed, c.budget_s, expected_fail ? " [expected failure]" : "",
                   in_time ? o.detail : o.detail + "; over time budget");
        std::fflush(stdout);
        unexpected += pass == expected_fail;
    }
    return unexpected == 0 ? 0 : 1;
}
