// SPDX-License-Identifier: Apache-2.0
//
// Closed-form link metrics: end-to-end success probability under CIPC,
// the warden's false-alarm / miss-detection / detection-error
// probabilities for an asymptotically long radiometer window, the
// log-free lower bound on DEP with its threshold bracket, and the
// time-averaged covert rate.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "covert/model.hpp"

namespace covert {

/// Probabilities are clamped to [0, 1] once the raw value is within this
/// band of the interval; anything further out raises NumericalError.
inline constexpr double kProbabilityGuard = 1e-9;

/// Relative gap |l1 - l2| / max(l1, l2) below which the equal-rate form
/// of the per-hop success probability is used.
inline constexpr double kEqualRateTolerance = 1e-6;

/// Threshold-dependent terms of the DEP closed form at one tau.
struct NuFunctions {
    double nu1 = 0.0;  // false-alarm exponent, L (tau_min - tau) / (2 l_d p_jam)
    double nu2 = 0.0;  // L (tau - tau_min) / (l_d q_c)
    double nu3 = 0.0;  // nu2 + 2 lambda3
    double nu4 = 0.0;  // ln(lambda3 / (lambda3 + nu2))
    double nu5 = 0.0;  // 2 lambda3 (phi1 nu2 nu3 + nu2 + nu3) / nu3^2
    double nu6 = 0.0;  // -nu2 / lambda3, linear lower bound of nu4
};

struct TauBounds {
    double tau_min = 0.0;
    double tau_max = 0.0;
};

struct TauOptimum {
    double tau_star = 0.0;
    double xi_lb_star = 0.0;
};

struct QcBounds {
    double q_min = 0.0;
    double q_max = 0.0;
    bool feasible = false;  // q_max > q_min
};

struct DetectionCurve {
    std::vector<double> taus;
    std::vector<double> p_fa;
    std::vector<double> p_md;
    std::vector<double> xi;
    std::vector<double> xi_lb;  // NaN below tau_min
    double tau_star = 0.0;
    double xi_lb_star = 0.0;
};

/// P[x_a + x_e < phi_snr * x_h | x_h > phi1] for x_a ~ Exp(lambda_a),
/// x_e ~ Exp(lambda_err), x_h ~ Exp(lambda3): one hop of the success
/// probability. Infinite rates denote a vanishing component.
double hop_success_probability(double lambda_a, double lambda_err, double lambda3, double phi1,
                               double phi_snr);

double success_probability(const DerivedConstants& dc);

NuFunctions nu_functions(const DerivedConstants& dc, double tau);

double false_alarm(const DerivedConstants& dc, double tau);
double miss_detection(const DerivedConstants& dc, double tau);
double dep(const DerivedConstants& dc, double tau);

/// Defined for tau >= tau_min only; InvalidArgument below.
double dep_lower_bound(const DerivedConstants& dc, double tau);

/// Throws Infeasible when p_max <= lambda3 q_c (pole of tau_max) or when
/// there is no data period (l_d = 0).
TauBounds tau_bounds(const DerivedConstants& dc);

/// Minimizes dep_lower_bound over [tau_min, tau_max]: uniform grid, then
/// golden-section refinement around the best grid point.
TauOptimum optimal_tau(const DerivedConstants& dc, int grid_points = 512);

/// Minimizes the exact DEP over the unbounded range tau >= tau_min on a
/// geometric offset grid with golden-section refinement. Does not need a
/// feasible bracket.
TauOptimum minimum_dep(const DerivedConstants& dc, int grid_points = 4096);

double covert_rate(const DerivedConstants& dc, double p_su, double r_ab);

/// Admissible Q_c range at a given L_d. Requires 0 < epsilon < 1.
QcBounds qc_bounds(const SystemConfig& cfg, std::int64_t l_d);

/// Samples p_fa, p_md, xi, xi_lb on `taus` (strictly increasing) and
/// locates the optimum of xi_lb. Propagates Infeasible from tau_bounds.
DetectionCurve detection_curve(const DerivedConstants& dc, std::span<const double> taus,
                               int grid_points = 512);

}  // namespace covert
