// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo block simulator for the two-hop CIPC link: draws estimated
// channels, aging innovations, estimation errors and warden channels per
// block, decides H1 from the CIPC feasibility of the estimates, tallies
// per-hop decoding success and the radiometer's false alarms / misses.
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "covert/model.hpp"
#include "covert/rng.hpp"

namespace covert {

enum class DetectorMode {
    asymptotic,     ///< infinite window: training/feedback bursts at their means
    finite_window,  ///< l_w symbol energies with per-symbol noise
};

struct TrialConfig {
    std::int64_t n_blocks = 10000;
    std::uint64_t seed = 1;
    DetectorMode mode = DetectorMode::asymptotic;
    std::int64_t l_w = 0;  ///< finite_window only
};

struct BlockDraw {
    std::complex<double> h_hat_ar, h_hat_rb;  // CN(0, 1 - beta)
    std::complex<double> omega_ar, omega_rb;  // CN(0, 1 - beta)
    std::complex<double> e_ar, e_rb;          // CN(0, beta)
    std::complex<double> h_aw, h_rw, h_bw;    // CN(0, 1)
};

struct SimulationReport {
    std::int64_t n_blocks = 0;
    std::int64_t n_h1 = 0;
    std::int64_t n_ar = 0;
    std::int64_t n_rb = 0;
    std::int64_t n_fa = 0;
    std::int64_t n_md = 0;
    bool p_su_defined = false;  ///< false when n_h1 == 0
    double p_su_hat = 0.0;      ///< NaN when undefined
    double xi_hat = 0.0;
    double ci_halfwidth_psu = 0.0;  ///< 95 % normal approximation
    double ci_halfwidth_xi = 0.0;
    std::uint64_t seed = 0;
};

/// Blocks per RNG substream. Fixed so that results do not depend on how
/// many workers run the chunks.
inline constexpr std::int64_t kBlocksPerStream = 4096;

BlockDraw draw_block(Rng& rng, double beta_star);

/// True channel rho h_hat + sqrt(1 - rho^2) omega + e.
std::complex<double> reassemble_channel(std::complex<double> h_hat, std::complex<double> omega,
                                        std::complex<double> e, double rho);

SimulationReport run_trials(const SystemConfig& cfg, double q_c, std::int64_t l_d, double tau,
                            const TrialConfig& trial, int jobs = 1);

struct SweepPoint {
    double q_c = 0.0;
    std::optional<SimulationReport> report;  ///< empty when the point failed
    std::string error;
};

/// One run_trials per grid point; point i draws from the master seed's
/// substream i. The detector threshold is irrelevant to P_su and is set to
/// zero.
std::vector<SweepPoint> empirical_success_sweep(const SystemConfig& cfg, std::int64_t l_d,
                                                std::span<const double> q_c_grid,
                                                const TrialConfig& trial, int jobs = 1);

}  // namespace covert
