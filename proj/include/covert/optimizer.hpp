// SPDX-License-Identifier: Apache-2.0
//
// Covert-rate maximization over (Q_c, L_d) under the worst-case DEP
// constraint: a Q_c grid scan at fixed L_d, an integer L_d scan at fixed
// Q_c, the alternating loop over the two, and an exhaustive product-grid
// reference that shares the same per-point evaluation.
#pragma once

#include <cstdint>
#include <vector>

#include "covert/analytics.hpp"
#include "covert/model.hpp"

namespace covert {

struct OptimizerSettings {
    double a_q = 0.0;  ///< Q_c step in mW; 0 selects (q_max - q_min) / 200 per L_d
    int k_max = 20;
    double rho_tol = 1e-6;
    int tau_grid = 512;
};

void validate(const OptimizerSettings& settings);

/// Everything known about one (Q_c, L_d) candidate.
struct PointEvaluation {
    double q_c = 0.0;
    std::int64_t l_d = 0;
    bool bracket_ok = false;  ///< tau bracket exists
    bool feasible = false;    ///< Q_c range and DEP constraint both hold
    double theta = 0.0;
    double p_su = 0.0;
    double tau_star = 0.0;
    double xi_lb_star = 0.0;
    double cr = 0.0;  ///< covert rate if feasible, else 0
};

struct TraceEntry {
    int iteration = 0;
    double q_c = 0.0;
    std::int64_t l_d = 0;
    double cr = 0.0;
};

struct OptimizationResult {
    double q_c_star = 0.0;
    std::int64_t l_d_star = 0;
    double tau_star = 0.0;
    double cr_star = 0.0;
    double xi_lb_star = 0.0;
    bool feasible = false;
    std::vector<TraceEntry> trace;
};

struct QcSearch {
    double q_c_star = 0.0;
    double cr = 0.0;
    PointEvaluation detail;
    std::size_t evaluated = 0;
};

struct LdSearch {
    std::int64_t l_d_star = 0;
    double cr = 0.0;
    PointEvaluation detail;
    std::size_t evaluated = 0;
};

/// Worst-case covertness: the optimal lower-bound DEP must not fall more
/// than epsilon below min(theta, 1 - theta).
bool feasible_dep(const SystemConfig& cfg, const DerivedConstants& dc, double xi_lb_star);

/// Q_c candidates at a given L_d: q_min + k a_q for k >= 0 up to q_max.
/// Empty when the range is empty.
std::vector<double> qc_grid(const SystemConfig& cfg, std::int64_t l_d,
                            const OptimizerSettings& settings);

/// Single evaluation path shared by every search below.
PointEvaluation evaluate_point(const SystemConfig& cfg, double q_c, std::int64_t l_d,
                               const OptimizerSettings& settings);

QcSearch optimize_qc(const SystemConfig& cfg, std::int64_t l_d, const OptimizerSettings& settings,
                     int jobs = 1);

LdSearch optimize_ld(const SystemConfig& cfg, double q_c, const OptimizerSettings& settings,
                     int jobs = 1);

OptimizationResult alternate(const SystemConfig& cfg, const OptimizerSettings& settings,
                             int jobs = 1);

/// Largest product grid exhaustive_2d accepts.
inline constexpr std::size_t kExhaustiveGridLimit = 100000;

/// Scans every L_d in [1, L_d^max] against that L_d's qc_grid.
OptimizationResult exhaustive_2d(const SystemConfig& cfg, const OptimizerSettings& settings,
                                 int jobs = 1);

}  // namespace covert
