// SPDX-License-Identifier: Apache-2.0
#include "covert/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "covert/analytics.hpp"
#include "covert/errors.hpp"
#include "covert/optimizer.hpp"
#include "covert/parallel.hpp"
#include "covert/simulator.hpp"
#include "covert/verify.hpp"

namespace covert::cli {
namespace {

// Section order and defaults of the configuration schema.
const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>&
schema() {
    static const std::vector<
        std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>
        table = {
            {"run", {{"seed", "1"}}},
            {"system",
             {{"p_max_dbm", "20"},
              {"n0_dbm", "0"},
              {"l_t", "10"},
              {"l_f", "10"},
              {"delta", "0.0001"},
              {"f_ar", "10"},
              {"f_rb", "10"},
              {"r_ab", "1"},
              {"epsilon", "0.1"},
              {"ld_cap", "4096"}}},
            {"point", {{"q_c", "5"}, {"l_d", "100"}}},
            {"analyze", {{"tau_points", "201"}, {"tau_span", "4"}}},
            {"simulate",
             {{"n_blocks", "10000"}, {"tau", "auto"}, {"mode", "asymptotic"}, {"l_w", "0"}}},
            {"optimize",
             {{"method", "alternate"},
              {"a_q", "0"},
              {"k_max", "20"},
              {"rho_tol", "1e-6"},
              {"tau_grid", "512"}}},
            {"sweep",
             {{"kind", "psu_qc"},
              {"start", "0"},
              {"stop", "0"},
              {"points", "0"},
              {"ld_start", "1"},
              {"ld_stop", "0"},
              {"ld_step", "1"},
              {"simulate", "false"},
              {"n_blocks", "10000"}}},
            {"verify", {{"tau_points", "20"}, {"rel_tol", "1e-10"}}},
        };
    return table;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// ---------------------------------------------------------------- CSV

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : width_(header.size()) { add(header); }

    void add(const std::vector<std::string>& row) {
        if (row.size() != width_) {
            throw std::logic_error("CSV row width mismatch");
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            text_ += row[i];
            text_ += i + 1 < row.size() ? ',' : '\n';
        }
    }

    const std::string& text() const { return text_; }

private:
    std::size_t width_;
    std::string text_;
};

std::string num(double x) { return format_number(x); }
std::string num(std::int64_t x) { return fmt::format("{}", x); }
std::string yes_no(bool b) { return b ? "1" : "0"; }

// Error messages end up inside a CSV cell.
std::string status_text(const std::string& message) {
    std::string s = message;
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return "error: " + s;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ------------------------------------------------------------ run state

struct Files {
    std::vector<std::pair<std::string, std::string>> items;
    void put(std::string name, std::string text) {
        items.emplace_back(std::move(name), std::move(text));
    }
};

struct Context {
    Config config;
    std::filesystem::path out_dir;
    int jobs = 1;
    std::ostream* err = nullptr;
};

SystemConfig system_config(const Config& c) {
    SystemConfig s;
    s.p_max = dbm_to_mw(c.number("system.p_max_dbm"));
    s.n0 = dbm_to_mw(c.number("system.n0_dbm"));
    s.l_t = c.integer("system.l_t");
    s.l_f = c.integer("system.l_f");
    s.delta = c.number("system.delta");
    s.f_ar = c.number("system.f_ar");
    s.f_rb = c.number("system.f_rb");
    s.r_ab = c.number("system.r_ab");
    s.epsilon = c.number("system.epsilon");
    s.ld_cap = c.integer("system.ld_cap");
    validate(s);
    return s;
}

OptimizerSettings optimizer_settings(const Config& c) {
    OptimizerSettings o;
    o.a_q = c.number("optimize.a_q");
    o.k_max = static_cast<int>(c.integer("optimize.k_max"));
    o.rho_tol = c.number("optimize.rho_tol");
    o.tau_grid = static_cast<int>(c.integer("optimize.tau_grid"));
    validate(o);
    return o;
}

std::uint64_t seed_of(const Config& c) {
    const std::int64_t s = c.integer("run.seed");
    if (s < 0) {
        throw InvalidArgument("run.seed must be >= 0");
    }
    return static_cast<std::uint64_t>(s);
}

double point_qc(const Config& c) {
    const double q = c.number("point.q_c");
    if (!(q > 0)) {
        throw InvalidArgument("point.q_c must be > 0");
    }
    return q;
}

std::int64_t point_ld(const Config& c) {
    const std::int64_t l = c.integer("point.l_d");
    if (l < 0) {
        throw InvalidArgument("point.l_d must be >= 0");
    }
    return l;
}

TrialConfig trial_config(const Config& c, const std::string& blocks_key) {
    TrialConfig t;
    t.n_blocks = c.integer(blocks_key);
    if (t.n_blocks < 1) {
        throw InvalidArgument(blocks_key + " must be >= 1");
    }
    t.seed = seed_of(c);
    const std::string& mode = c.raw("simulate.mode");
    if (mode == "asymptotic") {
        t.mode = DetectorMode::asymptotic;
    } else if (mode == "finite_window") {
        t.mode = DetectorMode::finite_window;
    } else {
        throw InvalidArgument("simulate.mode must be asymptotic or finite_window");
    }
    t.l_w = c.integer("simulate.l_w");
    return t;
}

// ------------------------------------------------------------- analyze

int cmd_analyze(const Context& ctx, Files& files) {
    const Config& c = ctx.config;
    const SystemConfig cfg = system_config(c);
    const OptimizerSettings settings = optimizer_settings(c);
    const double q_c = point_qc(c);
    const std::int64_t l_d = point_ld(c);
    const std::int64_t n = c.integer("analyze.tau_points");
    const double span = c.number("analyze.tau_span");
    if (n < 2) {
        throw InvalidArgument("analyze.tau_points must be >= 2");
    }
    if (!(span > 0)) {
        throw InvalidArgument("analyze.tau_span must be > 0");
    }

    const DerivedConstants dc = derive_constants(cfg, q_c, l_d);
    const TauBounds tb = tau_bounds(dc);
    std::vector<double> taus(static_cast<std::size_t>(n));
    const double hi = tb.tau_min + span * (tb.tau_max - tb.tau_min);
    for (std::int64_t i = 0; i < n; ++i) {
        taus[static_cast<std::size_t>(i)] =
            tb.tau_min + (hi - tb.tau_min) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    const DetectionCurve curve = detection_curve(dc, taus, settings.tau_grid);
    const double p_su = success_probability(dc);
    const PointEvaluation eval = evaluate_point(cfg, q_c, l_d, settings);

    Csv table({"tau", "p_fa", "p_md", "xi", "xi_lb"});
    for (std::size_t i = 0; i < taus.size(); ++i) {
        table.add({num(curve.taus[i]), num(curve.p_fa[i]), num(curve.p_md[i]), num(curve.xi[i]),
                   num(curve.xi_lb[i])});
    }
    Csv summary({"q_c", "l_d", "theta", "p_su", "tau_min", "tau_max", "tau_star", "xi_lb_star",
                 "cr", "feasible"});
    summary.add({num(q_c), num(l_d), num(dc.theta), num(p_su), num(tb.tau_min), num(tb.tau_max),
                 num(curve.tau_star), num(curve.xi_lb_star), num(covert_rate(dc, p_su, cfg.r_ab)),
                 yes_no(eval.feasible)});
    files.put("analyze.csv", table.text());
    files.put("analyze_summary.csv", summary.text());
    return kOk;
}

// ------------------------------------------------------------ simulate

int cmd_simulate(const Context& ctx, Files& files) {
    const Config& c = ctx.config;
    const SystemConfig cfg = system_config(c);
    const OptimizerSettings settings = optimizer_settings(c);
    const double q_c = point_qc(c);
    const std::int64_t l_d = point_ld(c);
    const TrialConfig trial = trial_config(c, "simulate.n_blocks");
    const DerivedConstants dc = derive_constants(cfg, q_c, l_d);

    double tau = 0.0;
    if (c.raw("simulate.tau") == "auto") {
        tau = optimal_tau(dc, settings.tau_grid).tau_star;
    } else {
        tau = c.number("simulate.tau");
    }
    const SimulationReport r = run_trials(cfg, q_c, l_d, tau, trial, ctx.jobs);

    Csv table({"q_c", "l_d", "tau", "n_blocks", "n_h1", "n_ar", "n_rb", "n_fa", "n_md",
               "p_su_defined", "p_su_hat", "ci_psu", "xi_hat", "ci_xi", "p_su", "xi", "theta",
               "seed"});
    table.add({num(q_c), num(l_d), num(tau), num(r.n_blocks), num(r.n_h1), num(r.n_ar),
               num(r.n_rb), num(r.n_fa), num(r.n_md), yes_no(r.p_su_defined), num(r.p_su_hat),
               num(r.ci_halfwidth_psu), num(r.xi_hat), num(r.ci_halfwidth_xi),
               num(success_probability(dc)), num(dep(dc, tau)), num(dc.theta),
               fmt::format("{}", r.seed)});
    files.put("simulate.csv", table.text());
    return kOk;
}

// ------------------------------------------------------------ optimize

int cmd_optimize(const Context& ctx, Files& files) {
    const Config& c = ctx.config;
    const SystemConfig cfg = system_config(c);
    const OptimizerSettings settings = optimizer_settings(c);
    const std::string& method = c.raw("optimize.method");
    OptimizationResult result;
    if (method == "alternate") {
        result = alternate(cfg, settings, ctx.jobs);
    } else if (method == "exhaustive") {
        result = exhaustive_2d(cfg, settings, ctx.jobs);
    } else {
        throw InvalidArgument("optimize.method must be alternate or exhaustive");
    }

    Csv table({"method", "q_c_star", "l_d_star", "tau_star", "cr_star", "xi_lb_star", "feasible"});
    table.add({method, num(result.q_c_star), num(result.l_d_star), num(result.tau_star),
               num(result.cr_star), num(result.xi_lb_star), yes_no(result.feasible)});
    Csv trace({"iteration", "q_c", "l_d", "cr"});
    for (const TraceEntry& t : result.trace) {
        trace.add({num(std::int64_t{t.iteration}), num(t.q_c), num(t.l_d), num(t.cr)});
    }
    files.put("optimize.csv", table.text());
    files.put("optimize_trace.csv", trace.text());
    if (!result.feasible) {
        *ctx.err << "optimize: no feasible (Q_c, L_d) point; CR set to zero\n";
        return kInfeasible;
    }
    return kOk;
}

// --------------------------------------------------------------- sweep

std::vector<double> sweep_axis(const Config& c) {
    const double start = c.number("sweep.start");
    const double stop = c.number("sweep.stop");
    const std::int64_t points = c.integer("sweep.points");
    if (points < 1 || !(stop >= start) || (points > 1 && !(stop > start))) {
        throw InvalidArgument(
            "empty sweep range: need sweep.points >= 1 and sweep.start <= sweep.stop "
            "(strictly below when points > 1)");
    }
    std::vector<double> axis(static_cast<std::size_t>(points));
    for (std::int64_t i = 0; i < points; ++i) {
        axis[static_cast<std::size_t>(i)] =
            points == 1 ? start
                        : start + (stop - start) * static_cast<double>(i) /
                                      static_cast<double>(points - 1);
    }
    return axis;
}

// Runs `row(i)` for every point in parallel; a throwing point becomes a
// flagged row built by `failed(i, message)`.
using RowFn = std::function<std::vector<std::string>(std::size_t)>;
using FailFn = std::function<std::vector<std::string>(std::size_t, const std::string&)>;

void fill_rows(Csv& table, std::size_t n, int jobs, const RowFn& row, const FailFn& failed) {
    std::vector<std::vector<std::string>> rows(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        try {
            rows[i] = row(i);
        } catch (const std::exception& e) {
            rows[i] = failed(i, e.what());
        }
    });
    for (const auto& r : rows) {
        table.add(r);
    }
}

std::vector<std::string> padded(std::vector<std::string> lead, std::size_t width,
                                const std::string& status) {
    while (lead.size() + 1 < width) {
        lead.push_back(num(kNaN));
    }
    lead.push_back(status);
    return lead;
}

int cmd_sweep(const Context& ctx, Files& files) {
    const Config& c = ctx.config;
    const SystemConfig cfg = system_config(c);
    const OptimizerSettings settings = optimizer_settings(c);
    const std::string& kind = c.raw("sweep.kind");
    const std::vector<double> axis = sweep_axis(c);
    const bool simulate = c.flag("sweep.simulate");
    const std::uint64_t seed = seed_of(c);
    const int jobs = ctx.jobs;

    if (kind == "psu_qc") {
        const std::int64_t l_d = point_ld(c);
        const TrialConfig trial = simulate ? trial_config(c, "sweep.n_blocks") : TrialConfig{};
        std::vector<std::string> header = {"q_c", "l_d", "theta", "p_su"};
        if (simulate) {
            header.insert(header.end(), {"p_su_sim", "ci_psu", "n_h1"});
        }
        header.push_back("status");
        Csv table(header);
        fill_rows(
            table, axis.size(), jobs,
            [&](std::size_t i) {
                const DerivedConstants dc = derive_constants(cfg, axis[i], l_d);
                std::vector<std::string> row = {num(axis[i]), num(l_d), num(dc.theta),
                                                num(success_probability(dc))};
                if (simulate) {
                    TrialConfig t = trial;
                    t.seed = substream_seed(seed, i);
                    const SimulationReport r = run_trials(cfg, axis[i], l_d, 0.0, t, 1);
                    row.insert(row.end(),
                               {num(r.p_su_hat), num(r.ci_halfwidth_psu), num(r.n_h1)});
                }
                row.push_back("ok");
                return row;
            },
            [&](std::size_t i, const std::string& m) {
                return padded({num(axis[i]), num(l_d)}, header.size(), status_text(m));
            });
        files.put("sweep_psu_qc.csv", table.text());
        return kOk;
    }

    if (kind == "dep_tau") {
        const double q_c = point_qc(c);
        const std::int64_t l_d = point_ld(c);
        const DerivedConstants dc = derive_constants(cfg, q_c, l_d);
        const double tau_min = dc.phi4 + dc.n0;
        const TrialConfig trial = simulate ? trial_config(c, "sweep.n_blocks") : TrialConfig{};
        std::vector<std::string> header = {"tau", "p_fa", "p_md", "xi", "xi_lb"};
        if (simulate) {
            header.insert(header.end(), {"xi_sim", "ci_xi"});
        }
        header.push_back("status");
        Csv table(header);
        fill_rows(
            table, axis.size(), jobs,
            [&](std::size_t i) {
                const double tau = axis[i];
                if (!(tau >= 0)) {
                    throw InvalidArgument("threshold must be >= 0");
                }
                const double lb = tau >= tau_min ? dep_lower_bound(dc, tau) : kNaN;
                std::vector<std::string> row = {num(tau), num(false_alarm(dc, tau)),
                                                num(miss_detection(dc, tau)), num(dep(dc, tau)),
                                                num(lb)};
                if (simulate) {
                    TrialConfig t = trial;
                    t.seed = substream_seed(seed, i);
                    const SimulationReport r = run_trials(cfg, q_c, l_d, tau, t, 1);
                    row.insert(row.end(), {num(r.xi_hat), num(r.ci_halfwidth_xi)});
                }
                row.push_back("ok");
                return row;
            },
            [&](std::size_t i, const std::string& m) {
                return padded({num(axis[i])}, header.size(), status_text(m));
            });
        files.put("sweep_dep_tau.csv", table.text());
        return kOk;
    }

    if (kind == "xistar_pmax") {
        const double q_c = point_qc(c);
        const std::int64_t l_d = point_ld(c);
        const std::vector<std::string> header = {"p_max_dbm", "theta",  "xi_star",
                                                 "tau_xi_star", "tau_star", "xi_lb_star",
                                                 "status"};
        Csv table(header);
        fill_rows(
            table, axis.size(), jobs,
            [&](std::size_t i) {
                SystemConfig local = cfg;
                local.p_max = dbm_to_mw(axis[i]);
                const DerivedConstants dc = derive_constants(local, q_c, l_d);
                const TauOptimum exact = minimum_dep(dc);
                std::string status = "ok";
                double tau_star = kNaN;
                double xi_lb_star = kNaN;
                try {
                    const TauOptimum lb = optimal_tau(dc, settings.tau_grid);
                    tau_star = lb.tau_star;
                    xi_lb_star = lb.xi_lb_star;
                } catch (const Infeasible&) {
                    status = "no_bracket";
                }
                return std::vector<std::string>{num(axis[i]),        num(dc.theta),
                                                num(exact.xi_lb_star), num(exact.tau_star),
                                                num(tau_star),       num(xi_lb_star),
                                                status};
            },
            [&](std::size_t i, const std::string& m) {
                return padded({num(axis[i])}, header.size(), status_text(m));
            });
        files.put("sweep_xistar_pmax.csv", table.text());
        return kOk;
    }

    const std::vector<std::string> cr_header = {"q_c",        "l_d",      "theta",
                                                "p_su",       "cr_free",  "xi_lb_star",
                                                "feasible",   "cr",       "status"};
    auto cr_row = [&](double q_c, std::int64_t l_d) {
        const PointEvaluation p = evaluate_point(cfg, q_c, l_d, settings);
        const DerivedConstants dc = derive_constants(cfg, q_c, l_d);
        return std::vector<std::string>{
            num(q_c),
            num(l_d),
            num(p.theta),
            num(p.p_su),
            num(covert_rate(dc, p.p_su, cfg.r_ab)),
            p.bracket_ok ? num(p.xi_lb_star) : num(kNaN),
            yes_no(p.feasible),
            num(p.cr),
            p.bracket_ok ? "ok" : "no_bracket"};
    };

    if (kind == "cr_ld") {
        const double q_c = point_qc(c);
        std::vector<std::int64_t> lds;
        for (double x : axis) {
            const auto l = static_cast<std::int64_t>(std::llround(x));
            if (l < 0) {
                throw InvalidArgument("cr_ld sweep needs L_d >= 0");
            }
            if (lds.empty() || lds.back() != l) {
                lds.push_back(l);
            }
        }
        Csv table(cr_header);
        fill_rows(
            table, lds.size(), jobs, [&](std::size_t i) { return cr_row(q_c, lds[i]); },
            [&](std::size_t i, const std::string& m) {
                return padded({num(q_c), num(lds[i])}, cr_header.size(), status_text(m));
            });
        files.put("sweep_cr_ld.csv", table.text());
        return kOk;
    }

    if (kind == "cr_surface") {
        const std::int64_t ld_start = c.integer("sweep.ld_start");
        std::int64_t ld_stop = c.integer("sweep.ld_stop");
        const std::int64_t ld_step = c.integer("sweep.ld_step");
        if (ld_stop == 0) {
            ld_stop = max_data_symbols(cfg);
        }
        if (ld_start < 1 || ld_step < 1 || ld_stop < ld_start) {
            throw InvalidArgument(
                "empty L_d range: need 1 <= sweep.ld_start <= sweep.ld_stop and ld_step >= 1");
        }
        struct Cell {
            double q_c;
            std::int64_t l_d;
        };
        std::vector<Cell> cells;
        for (std::int64_t l = ld_start; l <= ld_stop; l += ld_step) {
            for (double q : axis) {
                cells.push_back({q, l});
            }
        }
        Csv table(cr_header);
        fill_rows(
            table, cells.size(), jobs,
            [&](std::size_t i) { return cr_row(cells[i].q_c, cells[i].l_d); },
            [&](std::size_t i, const std::string& m) {
                return padded({num(cells[i].q_c), num(cells[i].l_d)}, cr_header.size(),
                              status_text(m));
            });
        files.put("sweep_cr_surface.csv", table.text());
        return kOk;
    }

    if (kind == "crstar_pmax") {
        const std::vector<std::string> header = {"p_max_dbm", "q_c_star", "l_d_star",
                                                 "tau_star",  "cr_star",  "xi_lb_star",
                                                 "feasible",  "status"};
        Csv table(header);
        fill_rows(
            table, axis.size(), jobs,
            [&](std::size_t i) {
                SystemConfig local = cfg;
                local.p_max = dbm_to_mw(axis[i]);
                const OptimizationResult r = alternate(local, settings, 1);
                return std::vector<std::string>{num(axis[i]),       num(r.q_c_star),
                                                num(r.l_d_star),    num(r.tau_star),
                                                num(r.cr_star),     num(r.xi_lb_star),
                                                yes_no(r.feasible), "ok"};
            },
            [&](std::size_t i, const std::string& m) {
                return padded({num(axis[i])}, header.size(), status_text(m));
            });
        files.put("sweep_crstar_pmax.csv", table.text());
        return kOk;
    }

    throw InvalidArgument("unknown sweep.kind '" + kind +
                          "' (psu_qc, dep_tau, xistar_pmax, cr_ld, cr_surface, crstar_pmax)");
}

// -------------------------------------------------------------- verify

int cmd_verify(const Context& ctx, Files& files) {
    const Config& c = ctx.config;
    const SystemConfig cfg = system_config(c);
    const double q_c = point_qc(c);
    const std::int64_t l_d = point_ld(c);
    const std::int64_t n = c.integer("verify.tau_points");
    if (n < 1) {
        throw InvalidArgument("verify.tau_points must be >= 1");
    }
    verify::QuadratureSpec spec;
    spec.rel_tol = c.number("verify.rel_tol");
    verify::validate(spec);

    const DerivedConstants dc = derive_constants(cfg, q_c, l_d);
    const TauBounds tb = tau_bounds(dc);
    Csv table({"quantity", "tau", "closed_form", "quadrature", "abs_diff"});
    auto add = [&](const std::string& what, double tau, double closed, double quad) {
        table.add({what, num(tau), num(closed), num(quad), num(std::abs(closed - quad))});
    };
    add("theta", kNaN, dc.theta, verify::h1_probability_quadrature(dc, spec));
    add("p_su", kNaN, success_probability(dc), verify::success_probability_quadrature(dc, spec));

    std::vector<double> taus(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        taus[static_cast<std::size_t>(i)] =
            tb.tau_min + (tb.tau_max - tb.tau_min) * static_cast<double>(i + 1) /
                             static_cast<double>(n);
    }
    std::vector<double> md(taus.size());
    std::vector<double> fa(taus.size());
    parallel_for(taus.size(), ctx.jobs, [&](std::size_t i) {
        md[i] = verify::miss_detection_quadrature(dc, taus[i], spec);
        fa[i] = verify::false_alarm_quadrature(dc, taus[i], spec);
    });
    for (std::size_t i = 0; i < taus.size(); ++i) {
        add("p_md", taus[i], miss_detection(dc, taus[i]), md[i]);
    }
    for (std::size_t i = 0; i < taus.size(); ++i) {
        add("p_fa", taus[i], false_alarm(dc, taus[i]), fa[i]);
    }
    files.put("verify.csv", table.text());
    return kOk;
}

void write_files(const std::filesystem::path& dir, const Files& files) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, text] : files.items) {
        std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
        f << text;
        f.close();
        if (!f) {
            throw std::runtime_error("cannot write " + (dir / name).string());
        }
    }
}

}  // namespace

// -------------------------------------------------------------- Config

Config Config::defaults() {
    Config c;
    for (const auto& [section, keys] : schema()) {
        for (const auto& [key, value] : keys) {
            c.values_[section + "." + key] = value;
        }
    }
    return c;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw InvalidArgument("unknown configuration key '" + key + "'");
    }
    it->second = trim(value);
}

void Config::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open config file " + path.string());
    }
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidArgument("config parse error: " + std::string(e.what()));
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            throw InvalidArgument("config key '" + section + "' is outside any section");
        }
        for (const auto& [key, value] : body) {
            set(section + "." + key, value.data());
        }
    }
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw InvalidArgument("--set expects section.key=value, got '" + assignment + "'");
    }
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

const std::string& Config::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw std::logic_error("undeclared configuration key " + key);
    }
    return it->second;
}

double Config::number(const std::string& key) const {
    const std::string& s = raw(key);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v)) {
        throw InvalidArgument(key + " = '" + s + "' is not a finite number");
    }
    return v;
}

std::int64_t Config::integer(const std::string& key) const {
    const std::string& s = raw(key);
    std::int64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw InvalidArgument(key + " = '" + s + "' is not an integer");
    }
    return v;
}

bool Config::flag(const std::string& key) const {
    const std::string& s = raw(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no" || s == "off") {
        return false;
    }
    throw InvalidArgument(key + " = '" + s + "' is not a boolean");
}

std::string Config::to_ini() const {
    std::string text;
    for (const auto& [section, keys] : schema()) {
        text += "[" + section + "]\n";
        for (const auto& entry : keys) {
            text += entry.first + " = " + raw(section + "." + entry.first) + "\n";
        }
        text += "\n";
    }
    return text;
}

std::string format_number(double x) {
    if (x == 0.0) {
        return "0";  // no "-0"
    }
    return fmt::format("{:.15g}", x);
}

// ------------------------------------------------------------- run_cli

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-hop covert relay analysis under imperfect CSI"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = "out";
    std::optional<std::int64_t> seed;
    int jobs = 1;
    app.add_option("--config", config_path, "INI configuration file");
    app.add_option("--set", overrides, "Override section.key=value (repeatable)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Master RNG seed (overrides run.seed)");
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 1024));

    using Command = std::function<int(const Context&, Files&)>;
    const std::vector<std::pair<std::string, std::pair<std::string, Command>>> commands = {
        {"analyze", {"Closed-form metrics and detection curve at one point", cmd_analyze}},
        {"simulate", {"Monte Carlo run at one point", cmd_simulate}},
        {"optimize", {"Covert-rate maximization", cmd_optimize}},
        {"sweep", {"One-dimensional or surface parameter sweep", cmd_sweep}},
        {"verify", {"Closed forms against quadrature oracles", cmd_verify}},
    };
    for (const auto& [name, info] : commands) {
        app.add_subcommand(name, info.first);
    }

    std::vector<std::string> argv_store = {"covert"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (std::string& s : argv_store) {
        argv.push_back(s.data());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kInvalidInput;
    }

    Context ctx;
    ctx.out_dir = out_dir;
    ctx.jobs = jobs;
    ctx.err = &err;
    const std::string name = app.get_subcommands().front()->get_name();
    try {
        ctx.config = Config::defaults();
        if (!config_path.empty()) {
            ctx.config.load_file(config_path);
        }
        for (const std::string& o : overrides) {
            ctx.config.apply_override(o);
        }
        if (seed) {
            ctx.config.set("run.seed", fmt::format("{}", *seed));
        }
        Files files;
        int code = kOk;
        for (const auto& [command, info] : commands) {
            if (command == name) {
                code = info.second(ctx, files);
            }
        }
        files.put("resolved_config.ini", ctx.config.to_ini());
        write_files(ctx.out_dir, files);
        return code;
    } catch (const InvalidArgument& e) {
        err << name << ": invalid input: " << e.what() << "\n";
        if (name == "sweep") {
            err << "usage: covert sweep --config FILE (needs [sweep] kind, start, stop, points)\n";
        }
        return kInvalidInput;
    } catch (const Infeasible& e) {
        err << name << ": infeasible configuration: " << e.what() << "\n";
        return kInfeasible;
    } catch (const std::exception& e) {
        err << name << ": internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

}  // namespace covert::cli
