// SPDX-License-Identifier: Apache-2.0
#include "covert/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "covert/errors.hpp"

namespace covert {
namespace {

double checked_probability(double raw, const char* what) {
    if (!(raw >= -kProbabilityGuard && raw <= 1.0 + kProbabilityGuard)) {
        throw NumericalError(std::string(what) + " left [0, 1] beyond the guard band: " +
                             std::to_string(raw));
    }
    return std::clamp(raw, 0.0, 1.0);
}

double tau_min_of(const DerivedConstants& dc) { return dc.phi4 + dc.n0; }

// Golden-section search for the minimum of f on [lo, hi].
template <class F>
TauOptimum golden_minimize(F&& f, double lo, double hi, double width) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > width) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? TauOptimum{c, fc} : TauOptimum{d, fd};
}

// Grid minimum followed by golden refinement between the neighbours of the
// best node. Never returns worse than the best grid node.
template <class F>
TauOptimum grid_then_golden(F&& f, std::span<const double> grid, double width) {
    std::size_t best = 0;
    double best_value = f(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = f(grid[i]);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    TauOptimum refined = golden_minimize(f, lo, hi, width);
    if (refined.xi_lb_star <= best_value) {
        return refined;
    }
    return {grid[best], best_value};
}

}  // namespace

double hop_success_probability(double lambda_a, double lambda_err, double lambda3, double phi1,
                               double phi_snr) {
    if (!(phi_snr > 0)) {
        return 0.0;
    }
    const bool a_vanishes = std::isinf(lambda_a);
    const bool e_vanishes = std::isinf(lambda_err);
    if (a_vanishes && e_vanishes) {
        return 1.0;
    }
    if (a_vanishes || e_vanishes) {
        const double l = a_vanishes ? lambda_err : lambda_a;
        return 1.0 - lambda3 * std::exp(-l * phi1 * phi_snr) / (lambda3 + l * phi_snr);
    }

    const double gap = std::abs(lambda_a - lambda_err);
    if (gap <= kEqualRateTolerance * std::max(lambda_a, lambda_err)) {
        // The hypoexponential CDF is symmetric in the two rates, so the
        // midpoint keeps the branch error second order in the gap.
        const double l = 0.5 * (lambda_a + lambda_err);
        const double z = l * phi_snr;
        return 1.0 - std::exp(-phi1 * z) * lambda3 *
                         (lambda3 + z * (2.0 + z * phi1 + lambda3 * phi1)) /
                         ((lambda3 + z) * (lambda3 + z));
    }

    const double first = std::exp(-phi1 * phi_snr * lambda_a) * lambda_err * lambda3 /
                         ((lambda_a - lambda_err) * (lambda3 + lambda_a * phi_snr));
    const double second = std::exp(-phi1 * phi_snr * lambda_err) * lambda_a * lambda3 /
                          ((lambda_err - lambda_a) * (lambda3 + lambda_err * phi_snr));
    return 1.0 + first + second;
}

double success_probability(const DerivedConstants& dc) {
    if (dc.phi2 <= 0 || dc.phi3 <= 0) {
        return 0.0;
    }
    const double first_hop = checked_probability(
        hop_success_probability(dc.lambda1, dc.lambda2, dc.lambda3, dc.phi1, dc.phi2),
        "first-hop success probability");
    const double second_hop = checked_probability(
        hop_success_probability(dc.lambda4, dc.lambda2, dc.lambda3, dc.phi1, dc.phi3),
        "second-hop success probability");
    return first_hop * second_hop;
}

NuFunctions nu_functions(const DerivedConstants& dc, double tau) {
    if (dc.l_d <= 0) {
        throw InvalidArgument("threshold functions need l_d > 0");
    }
    const double l_block = static_cast<double>(dc.l_block);
    const double l_d = static_cast<double>(dc.l_d);
    const double excess = tau - tau_min_of(dc);

    NuFunctions nu;
    nu.nu1 = -l_block * excess / (2.0 * l_d * dc.p_jam);
    nu.nu2 = l_block * excess / (l_d * dc.q_c);
    nu.nu3 = nu.nu2 + 2.0 * dc.lambda3;
    nu.nu4 = -std::log1p(nu.nu2 / dc.lambda3);
    nu.nu5 = 2.0 * dc.lambda3 * (dc.phi1 * nu.nu2 * nu.nu3 + nu.nu2 + nu.nu3) / (nu.nu3 * nu.nu3);
    nu.nu6 = -nu.nu2 / dc.lambda3;
    return nu;
}

double false_alarm(const DerivedConstants& dc, double tau) {
    const double tau_min = tau_min_of(dc);
    if (tau <= tau_min) {
        return 1.0;
    }
    if (dc.l_d == 0) {
        return 0.0;  // statistic is the constant tau_min
    }
    return std::exp(nu_functions(dc, tau).nu1);
}

double miss_detection(const DerivedConstants& dc, double tau) {
    const double tau_min = tau_min_of(dc);
    if (tau <= tau_min) {
        return 0.0;
    }
    if (dc.l_d == 0) {
        return 1.0;
    }
    const NuFunctions nu = nu_functions(dc, tau);
    const double l3 = dc.lambda3;
    // P_MD theta = theta + e^{-nu3 phi1} [..] / nu3^2, divided through by
    // theta = e^{-2 lambda3 phi1}.
    const double bracket = 2.0 * (l3 * l3 * (nu.nu3 * dc.phi1 + 1.0) * nu.nu4 - l3 * nu.nu3);
    const double raw = 1.0 + std::exp(-nu.nu2 * dc.phi1) * bracket / (nu.nu3 * nu.nu3);
    return checked_probability(raw, "miss-detection probability");
}

double dep(const DerivedConstants& dc, double tau) {
    if (tau < tau_min_of(dc)) {
        return 1.0 - dc.theta;
    }
    const double raw = (1.0 - dc.theta) * false_alarm(dc, tau) + dc.theta * miss_detection(dc, tau);
    return checked_probability(raw, "detection error probability");
}

double dep_lower_bound(const DerivedConstants& dc, double tau) {
    if (tau < tau_min_of(dc)) {
        throw InvalidArgument("DEP lower bound is defined for tau >= tau_min only");
    }
    if (dc.l_d == 0) {
        return dep(dc, tau);
    }
    const NuFunctions nu = nu_functions(dc, tau);
    return dc.theta - std::exp(nu.nu1) * (std::exp(dc.phi5) * nu.nu5 - 1.0 + dc.theta);
}

TauBounds tau_bounds(const DerivedConstants& dc) {
    const double q_eff = dc.lambda3 * dc.q_c;
    if (!(dc.p_max > q_eff)) {
        throw Infeasible("threshold bracket undefined: p_max <= lambda3 * q_c");
    }
    if (dc.l_d <= 0) {
        throw Infeasible("threshold bracket undefined: no data symbols");
    }
    const double l_block = static_cast<double>(dc.l_block);
    const double l_d = static_cast<double>(dc.l_d);
    TauBounds b;
    b.tau_min = tau_min_of(dc);
    b.tau_max = 2.0 * l_d * (q_eff * q_eff + q_eff * dc.p_max - dc.p_max * dc.p_max) /
                    (l_block * (dc.p_max - q_eff)) +
                dc.p_max + dc.n0;
    return b;
}

TauOptimum optimal_tau(const DerivedConstants& dc, int grid_points) {
    if (grid_points < 16) {
        throw InvalidArgument("optimal_tau needs at least 16 grid points");
    }
    const TauBounds b = tau_bounds(dc);
    const double span = b.tau_max - b.tau_min;
    std::vector<double> grid(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) {
        grid[static_cast<std::size_t>(i)] = b.tau_min + span * i / (grid_points - 1);
    }
    grid.back() = b.tau_max;
    auto f = [&dc](double tau) { return dep_lower_bound(dc, tau); };
    return grid_then_golden(f, grid, 1e-6 * span);
}

TauOptimum minimum_dep(const DerivedConstants& dc, int grid_points) {
    if (grid_points < 16) {
        throw InvalidArgument("minimum_dep needs at least 16 grid points");
    }
    const double tau_min = tau_min_of(dc);
    if (dc.l_d == 0) {
        // xi is 1 - theta at tau_min and theta beyond it.
        return dc.theta < 1.0 - dc.theta ? TauOptimum{std::nextafter(tau_min, 1e300), dc.theta}
                                         : TauOptimum{tau_min, 1.0 - dc.theta};
    }
    // Both exponential terms of xi decay with scale l_d p_max / L; 40 of
    // them leaves nothing above 1e-17.
    const double scale = static_cast<double>(dc.l_d) * dc.p_max / static_cast<double>(dc.l_block);
    const double far = 40.0 * scale;
    const double near = 1e-10 * scale;
    std::vector<double> grid(static_cast<std::size_t>(grid_points));
    grid[0] = tau_min;
    const double ratio = std::pow(far / near, 1.0 / (grid_points - 2));
    double offset = near;
    for (int i = 1; i < grid_points; ++i) {
        grid[static_cast<std::size_t>(i)] = tau_min + offset;
        offset *= ratio;
    }
    auto f = [&dc](double tau) { return dep(dc, tau); };
    // Refinement width relative to the smallest grid offset keeps the
    // golden search meaningful next to tau_min.
    return grid_then_golden(f, grid, 1e-3 * near);
}

double covert_rate(const DerivedConstants& dc, double p_su, double r_ab) {
    if (!(p_su >= 0 && p_su <= 1)) {
        throw InvalidArgument("p_su must lie in [0, 1]");
    }
    if (dc.l_d == 0) {
        return 0.0;
    }
    return dc.theta * p_su * r_ab * static_cast<double>(dc.l_d) / static_cast<double>(dc.l_block);
}

QcBounds qc_bounds(const SystemConfig& cfg, std::int64_t l_d) {
    validate(cfg);
    if (!(cfg.epsilon > 0 && cfg.epsilon < 1)) {
        throw InvalidArgument("Q_c bounds need 0 < epsilon < 1");
    }
    const double d = mean_feedback_delay(cfg, l_d);
    const double ra = correlation_coefficient(cfg.f_ar, d);
    const double rb = correlation_coefficient(cfg.f_rb, d);
    const double rho2 = std::min(ra * ra, rb * rb);
    const double beta = estimation_error_variance(cfg);
    const double sinr_target = std::pow(4.0, cfg.r_ab) - 1.0;

    const double outage_floor = rho2 > 0 ? cfg.n0 * sinr_target / rho2
                                         : std::numeric_limits<double>::infinity();
    const double prior_floor = cfg.p_max * (beta - 1.0) * std::log1p(-cfg.epsilon) / 2.0;

    QcBounds q;
    q.q_min = std::max(outage_floor, prior_floor);
    q.q_max = cfg.p_max * (beta - 1.0) * std::log(cfg.epsilon) / 2.0;
    q.feasible = q.q_max > q.q_min;
    return q;
}

DetectionCurve detection_curve(const DerivedConstants& dc, std::span<const double> taus,
                               int grid_points) {
    for (std::size_t i = 1; i < taus.size(); ++i) {
        if (!(taus[i] > taus[i - 1])) {
            throw InvalidArgument("detection curve thresholds must be strictly increasing");
        }
    }
    DetectionCurve curve;
    const TauOptimum opt = optimal_tau(dc, grid_points);
    curve.tau_star = opt.tau_star;
    curve.xi_lb_star = opt.xi_lb_star;
    const double tau_min = tau_min_of(dc);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double tau : taus) {
        curve.taus.push_back(tau);
        curve.p_fa.push_back(false_alarm(dc, tau));
        curve.p_md.push_back(miss_detection(dc, tau));
        curve.xi.push_back(dep(dc, tau));
        curve.xi_lb.push_back(tau >= tau_min ? dep_lower_bound(dc, tau) : nan);
    }
    return curve;
}

}  // namespace covert
