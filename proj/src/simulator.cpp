// SPDX-License-Identifier: Apache-2.0
#include "covert/simulator.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "covert/errors.hpp"
#include "covert/parallel.hpp"

namespace covert {
namespace {

struct Tally {
    std::int64_t n_h1 = 0;
    std::int64_t n_ar = 0;
    std::int64_t n_rb = 0;
    std::int64_t n_fa = 0;
    std::int64_t n_md = 0;
};

struct BlockSetup {
    double p_max;
    double n0;
    double q_c;
    double beta;
    double rho_ar;
    double rho_rb;
    double sinr_target;
    std::int64_t l_t;
    std::int64_t l_f;
    std::int64_t l_d;
    std::int64_t l_block;
    double p_jam;
    double tau;
    DetectorMode mode;
    std::int64_t l_w;
};

double sinr(double power, double rho, const std::complex<double>& h_hat,
            const std::complex<double>& omega, const std::complex<double>& e, double n0) {
    const double rho2 = rho * rho;
    return power * rho2 * std::norm(h_hat) /
           (power * ((1.0 - rho2) * std::norm(omega) + std::norm(e)) + n0);
}

// Radiometer energy averaged over l_w symbols, walking the block schedule
// cyclically: a pilots, b pilots, r feedback, then the two data halves.
double finite_window_statistic(const BlockSetup& s, const BlockDraw& d, bool h1, double p_a,
                               double p_r, Rng& rng) {
    const std::int64_t pilots_end = 2 * s.l_t;
    const std::int64_t feedback_end = pilots_end + s.l_f;
    const std::int64_t first_half_end = feedback_end + s.l_d;
    double energy = 0.0;
    for (std::int64_t t = 0; t < s.l_w; ++t) {
        const std::int64_t pos = t % s.l_block;
        std::complex<double> signal{0.0, 0.0};
        if (pos < s.l_t) {
            signal = std::sqrt(s.p_max) * d.h_aw;
        } else if (pos < pilots_end) {
            signal = std::sqrt(s.p_max) * d.h_bw;
        } else if (pos < feedback_end) {
            signal = std::sqrt(s.p_max) * d.h_rw;
        } else if (!h1) {
            signal = std::sqrt(s.p_jam) * d.h_bw;
        } else if (pos < first_half_end) {
            signal = std::sqrt(p_a) * d.h_aw;
        } else {
            signal = std::sqrt(p_r) * d.h_rw;
        }
        const std::complex<double> symbol = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform_open0());
        energy += std::norm(signal * symbol + rng.complex_normal(s.n0));
    }
    return energy / static_cast<double>(s.l_w);
}

Tally run_chunk(const BlockSetup& s, std::int64_t blocks, Rng& rng) {
    Tally tally;
    const double l_block = static_cast<double>(s.l_block);
    const double l_d = static_cast<double>(s.l_d);
    const double mean_bursts =
        s.p_max * static_cast<double>(2 * s.l_t + s.l_f) / l_block + s.n0;

    for (std::int64_t b = 0; b < blocks; ++b) {
        const BlockDraw d = draw_block(rng, s.beta);
        const double g_ar = std::norm(d.h_hat_ar);
        const double g_rb = std::norm(d.h_hat_rb);
        const bool h1 = g_ar * s.p_max >= s.q_c && g_rb * s.p_max >= s.q_c;

        double p_a = 0.0;
        double p_r = 0.0;
        if (h1) {
            ++tally.n_h1;
            p_a = s.q_c / g_ar;
            p_r = s.q_c / g_rb;
            if (sinr(p_a, s.rho_ar, d.h_hat_ar, d.omega_ar, d.e_ar, s.n0) > s.sinr_target) {
                ++tally.n_ar;
            }
            if (sinr(p_r, s.rho_rb, d.h_hat_rb, d.omega_rb, d.e_rb, s.n0) > s.sinr_target) {
                ++tally.n_rb;
            }
        }

        double statistic = 0.0;
        if (s.mode == DetectorMode::asymptotic) {
            statistic = mean_bursts;
            if (h1) {
                statistic += l_d / l_block * (p_a * std::norm(d.h_aw) + p_r * std::norm(d.h_rw));
            } else {
                statistic += 2.0 * l_d / l_block * s.p_jam * std::norm(d.h_bw);
            }
        } else {
            statistic = finite_window_statistic(s, d, h1, p_a, p_r, rng);
        }

        const bool alarm = statistic > s.tau;
        if (!h1 && alarm) {
            ++tally.n_fa;
        } else if (h1 && !alarm) {
            ++tally.n_md;
        }
    }
    return tally;
}

}  // namespace

BlockDraw draw_block(Rng& rng, double beta_star) {
    const double known = 1.0 - beta_star;
    BlockDraw d;
    d.h_hat_ar = rng.complex_normal(known);
    d.h_hat_rb = rng.complex_normal(known);
    d.omega_ar = rng.complex_normal(known);
    d.omega_rb = rng.complex_normal(known);
    d.e_ar = rng.complex_normal(beta_star);
    d.e_rb = rng.complex_normal(beta_star);
    d.h_aw = rng.complex_normal(1.0);
    d.h_rw = rng.complex_normal(1.0);
    d.h_bw = rng.complex_normal(1.0);
    return d;
}

std::complex<double> reassemble_channel(std::complex<double> h_hat, std::complex<double> omega,
                                        std::complex<double> e, double rho) {
    return rho * h_hat + std::sqrt(1.0 - rho * rho) * omega + e;
}

SimulationReport run_trials(const SystemConfig& cfg, double q_c, std::int64_t l_d, double tau,
                            const TrialConfig& trial, int jobs) {
    validate(cfg);
    if (trial.n_blocks < 1) {
        throw InvalidArgument("n_blocks must be >= 1");
    }
    if (!(tau >= 0)) {
        throw InvalidArgument("detector threshold must be >= 0");
    }
    if (trial.mode == DetectorMode::finite_window && trial.l_w < 1) {
        throw InvalidArgument("finite-window detector needs l_w >= 1");
    }
    const DerivedConstants dc = derive_constants(cfg, q_c, l_d);

    const BlockSetup setup{cfg.p_max,     cfg.n0,     q_c,        dc.beta_star,
                           dc.rho_ar,     dc.rho_rb,  std::pow(4.0, cfg.r_ab) - 1.0,
                           cfg.l_t,       cfg.l_f,    l_d,        dc.l_block,
                           dc.p_jam,      tau,        trial.mode, trial.l_w};

    const std::int64_t chunks = (trial.n_blocks + kBlocksPerStream - 1) / kBlocksPerStream;
    std::vector<Tally> tallies(static_cast<std::size_t>(chunks));
    parallel_for(tallies.size(), jobs, [&](std::size_t c) {
        const std::int64_t first = static_cast<std::int64_t>(c) * kBlocksPerStream;
        const std::int64_t blocks = std::min(kBlocksPerStream, trial.n_blocks - first);
        Rng rng(substream_seed(trial.seed, c));
        tallies[c] = run_chunk(setup, blocks, rng);
    });

    SimulationReport r;
    r.n_blocks = trial.n_blocks;
    r.seed = trial.seed;
    for (const Tally& t : tallies) {
        r.n_h1 += t.n_h1;
        r.n_ar += t.n_ar;
        r.n_rb += t.n_rb;
        r.n_fa += t.n_fa;
        r.n_md += t.n_md;
    }

    const double n = static_cast<double>(r.n_blocks);
    constexpr double z95 = 1.959963984540054;
    r.xi_hat = static_cast<double>(r.n_fa + r.n_md) / n;
    r.ci_halfwidth_xi = z95 * std::sqrt(r.xi_hat * (1.0 - r.xi_hat) / n);

    r.p_su_defined = r.n_h1 > 0;
    if (r.p_su_defined) {
        const double h1 = static_cast<double>(r.n_h1);
        const double a = static_cast<double>(r.n_ar) / h1;
        const double b = static_cast<double>(r.n_rb) / h1;
        r.p_su_hat = a * b;
        // Delta method for the product of two independent proportions.
        r.ci_halfwidth_psu = z95 * std::sqrt((b * b * a * (1.0 - a) + a * a * b * (1.0 - b)) / h1);
    } else {
        r.p_su_hat = std::numeric_limits<double>::quiet_NaN();
        r.ci_halfwidth_psu = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

std::vector<SweepPoint> empirical_success_sweep(const SystemConfig& cfg, std::int64_t l_d,
                                                std::span<const double> q_c_grid,
                                                const TrialConfig& trial, int jobs) {
    if (q_c_grid.empty()) {
        throw InvalidArgument("success sweep needs a non-empty Q_c grid");
    }
    std::vector<SweepPoint> points(q_c_grid.size());
    parallel_for(points.size(), jobs, [&](std::size_t i) {
        SweepPoint& p = points[i];
        p.q_c = q_c_grid[i];
        TrialConfig point_trial = trial;
        point_trial.seed = substream_seed(trial.seed, 0x5eedULL + i);
        try {
            p.report = run_trials(cfg, p.q_c, l_d, 0.0, point_trial, 1);
        } catch (const std::exception& e) {
            p.error = e.what();
        }
    });
    return points;
}

}  // namespace covert
