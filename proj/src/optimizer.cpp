// SPDX-License-Identifier: Apache-2.0
#include "covert/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covert/errors.hpp"
#include "covert/parallel.hpp"

namespace covert {
namespace {

constexpr double kDefaultQcSteps = 200.0;

// Higher CR wins; equal CR falls back to smaller Q_c, then smaller L_d.
bool better(const PointEvaluation& a, const PointEvaluation& b) {
    if (a.cr != b.cr) {
        return a.cr > b.cr;
    }
    if (a.q_c != b.q_c) {
        return a.q_c < b.q_c;
    }
    return a.l_d < b.l_d;
}

const PointEvaluation* best_of(const std::vector<PointEvaluation>& points) {
    const PointEvaluation* best = nullptr;
    for (const PointEvaluation& p : points) {
        if (best == nullptr || better(p, *best)) {
            best = &p;
        }
    }
    return best;
}

}  // namespace

void validate(const OptimizerSettings& settings) {
    if (!(settings.a_q >= 0) || !std::isfinite(settings.a_q)) {
        throw InvalidArgument("a_q must be >= 0 (0 selects the default step)");
    }
    if (settings.k_max < 1) {
        throw InvalidArgument("k_max must be >= 1");
    }
    if (!(settings.rho_tol >= 0)) {
        throw InvalidArgument("rho_tol must be >= 0");
    }
    if (settings.tau_grid < 16) {
        throw InvalidArgument("tau_grid must be >= 16");
    }
}

bool feasible_dep(const SystemConfig& cfg, const DerivedConstants& dc, double xi_lb_star) {
    if (dc.theta < 0.5) {
        return xi_lb_star >= dc.theta - cfg.epsilon;
    }
    return xi_lb_star >= 1.0 - dc.theta - cfg.epsilon;
}

std::vector<double> qc_grid(const SystemConfig& cfg, std::int64_t l_d,
                            const OptimizerSettings& settings) {
    validate(settings);
    const QcBounds bounds = qc_bounds(cfg, l_d);
    if (!bounds.feasible) {
        return {};
    }
    const double range = bounds.q_max - bounds.q_min;
    const double step = settings.a_q > 0 ? settings.a_q : range / kDefaultQcSteps;
    const auto steps = static_cast<std::int64_t>(std::floor(range / step + 1e-9));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(steps + 1));
    for (std::int64_t k = 0; k <= steps; ++k) {
        grid.push_back(std::min(bounds.q_min + static_cast<double>(k) * step, bounds.q_max));
    }
    return grid;
}

PointEvaluation evaluate_point(const SystemConfig& cfg, double q_c, std::int64_t l_d,
                               const OptimizerSettings& settings) {
    PointEvaluation p;
    p.q_c = q_c;
    p.l_d = l_d;
    if (l_d <= 0 || !(q_c > 0)) {
        return p;
    }
    const DerivedConstants dc = derive_constants(cfg, q_c, l_d);
    p.theta = dc.theta;
    p.p_su = success_probability(dc);
    try {
        const TauOptimum opt = optimal_tau(dc, settings.tau_grid);
        p.bracket_ok = true;
        p.tau_star = opt.tau_star;
        p.xi_lb_star = opt.xi_lb_star;
    } catch (const Infeasible&) {
        return p;
    }
    const QcBounds bounds = qc_bounds(cfg, l_d);
    const bool in_range = q_c > bounds.q_min && q_c <= bounds.q_max;
    p.feasible = in_range && l_d <= max_data_symbols(cfg) && feasible_dep(cfg, dc, p.xi_lb_star);
    p.cr = p.feasible ? covert_rate(dc, p.p_su, cfg.r_ab) : 0.0;
    return p;
}

QcSearch optimize_qc(const SystemConfig& cfg, std::int64_t l_d, const OptimizerSettings& settings,
                     int jobs) {
    validate(cfg);
    if (l_d < 0 || l_d > max_data_symbols(cfg)) {
        throw InvalidArgument("l_d outside [0, L_d^max]");
    }
    QcSearch search;
    search.detail.l_d = l_d;
    const std::vector<double> grid = qc_grid(cfg, l_d, settings);
    if (grid.empty()) {
        return search;
    }
    std::vector<PointEvaluation> points(grid.size());
    parallel_for(points.size(), jobs,
                 [&](std::size_t i) { points[i] = evaluate_point(cfg, grid[i], l_d, settings); });
    const PointEvaluation& best = *best_of(points);
    search.q_c_star = best.q_c;
    search.cr = best.cr;
    search.detail = best;
    search.evaluated = points.size();
    return search;
}

LdSearch optimize_ld(const SystemConfig& cfg, double q_c, const OptimizerSettings& settings,
                     int jobs) {
    validate(cfg);
    validate(settings);
    if (!(q_c > 0)) {
        throw InvalidArgument("q_c must be > 0");
    }
    LdSearch search;
    search.detail.q_c = q_c;
    const std::int64_t l_max = max_data_symbols(cfg);
    if (l_max < 1) {
        return search;
    }
    std::vector<PointEvaluation> points(static_cast<std::size_t>(l_max));
    parallel_for(points.size(), jobs, [&](std::size_t i) {
        points[i] = evaluate_point(cfg, q_c, static_cast<std::int64_t>(i) + 1, settings);
    });
    const PointEvaluation& best = *best_of(points);
    search.l_d_star = best.l_d;
    search.cr = best.cr;
    search.detail = best;
    search.evaluated = points.size();
    return search;
}

OptimizationResult alternate(const SystemConfig& cfg, const OptimizerSettings& settings,
                             int jobs) {
    validate(cfg);
    validate(settings);
    OptimizationResult result;
    // Printed initialization: R(0) = -1, R(1) = 0, L_d(1) = 0.
    result.trace.push_back({1, 0.0, 0, 0.0});
    const std::int64_t l_max = max_data_symbols(cfg);
    if (l_max < 1) {
        return result;
    }

    // L_d = 0 carries no data, so the first Q_c pass is seeded from inside
    // the admissible range instead; a few spread-out seeds are tried before
    // declaring the instance infeasible.
    const std::int64_t seeds[] = {std::max<std::int64_t>(1, l_max / 2),
                                  std::max<std::int64_t>(1, l_max / 4),
                                  std::max<std::int64_t>(1, 3 * l_max / 4), 1, l_max};

    PointEvaluation incumbent;
    double previous = -1.0;
    double current = 0.0;
    std::int64_t l_d = 0;
    for (int k = 1; k <= settings.k_max && current - previous >= settings.rho_tol; ++k) {
        QcSearch q_step;
        if (l_d == 0) {
            for (std::int64_t seed : seeds) {
                q_step = optimize_qc(cfg, seed, settings, jobs);
                if (q_step.detail.feasible) {
                    break;
                }
            }
            if (!q_step.detail.feasible) {
                return result;
            }
        } else {
            q_step = optimize_qc(cfg, l_d, settings, jobs);
        }
        const LdSearch l_step = optimize_ld(cfg, q_step.q_c_star, settings, jobs);
        const PointEvaluation& candidate =
            l_step.cr >= q_step.cr ? l_step.detail : q_step.detail;
        if (candidate.cr < current) {
            break;  // the Q_c grid moved with L_d and lost the incumbent
        }
        previous = current;
        current = candidate.cr;
        incumbent = candidate;
        l_d = candidate.l_d;
        result.trace.push_back({k + 1, candidate.q_c, candidate.l_d, candidate.cr});
    }

    result.q_c_star = incumbent.q_c;
    result.l_d_star = incumbent.l_d;
    result.tau_star = incumbent.tau_star;
    result.cr_star = incumbent.cr;
    result.xi_lb_star = incumbent.xi_lb_star;
    result.feasible = incumbent.feasible;
    return result;
}

OptimizationResult exhaustive_2d(const SystemConfig& cfg, const OptimizerSettings& settings,
                                 int jobs) {
    validate(cfg);
    validate(settings);
    OptimizationResult result;
    const std::int64_t l_max = max_data_symbols(cfg);

    struct Cell {
        double q_c;
        std::int64_t l_d;
    };
    std::vector<Cell> cells;
    for (std::int64_t l_d = 1; l_d <= l_max; ++l_d) {
        for (double q : qc_grid(cfg, l_d, settings)) {
            cells.push_back({q, l_d});
            if (cells.size() > kExhaustiveGridLimit) {
                throw InvalidArgument("exhaustive grid exceeds " +
                                      std::to_string(kExhaustiveGridLimit) + " points");
            }
        }
    }
    if (cells.empty()) {
        return result;
    }
    std::vector<PointEvaluation> points(cells.size());
    parallel_for(points.size(), jobs, [&](std::size_t i) {
        points[i] = evaluate_point(cfg, cells[i].q_c, cells[i].l_d, settings);
    });
    const PointEvaluation& best = *best_of(points);
    result.q_c_star = best.q_c;
    result.l_d_star = best.l_d;
    result.tau_star = best.tau_star;
    result.cr_star = best.cr;
    result.xi_lb_star = best.xi_lb_star;
    result.feasible = best.feasible;
    result.trace.push_back({1, best.q_c, best.l_d, best.cr});
    return result;
}

}  // namespace covert
