// SPDX-License-Identifier: Apache-2.0
//
// Imperfect-CSI model of the two-hop CIPC relay link: pilot-based MMSE
// estimation error, Jakes/Gauss-Markov channel aging over the feedback and
// data periods, and the constant bundle every closed form downstream is
// written in. All powers are linear mW.
#pragma once

#include <cstdint>

namespace covert {

struct SystemConfig {
    double p_max = 100.0;  ///< transmit-power ceiling, mW (also pilot power)
    double n0 = 1.0;       ///< noise power, mW
    std::int64_t l_t = 10; ///< pilot symbols per training slot
    std::int64_t l_f = 10; ///< feedback symbols
    double delta = 1e-4;   ///< symbol duration, s
    double f_ar = 10.0;    ///< max Doppler of a->r, Hz
    double f_rb = 10.0;    ///< max Doppler of r->b, Hz
    double r_ab = 1.0;     ///< end-to-end rate, bits per channel use
    double epsilon = 0.1;  ///< covertness budget
    /// Data-symbol ceiling used when both Doppler spreads are zero (the
    /// monotonicity bound diverges) or when the bound exceeds it.
    std::int64_t ld_cap = 4096;
};

/// Throws InvalidArgument naming the first violated field.
void validate(const SystemConfig& cfg);

struct DerivedConstants {
    double q_c = 0.0;
    std::int64_t l_d = 0;
    std::int64_t l_block = 0;  // 2 l_t + l_f + 2 l_d

    double p_max = 0.0;
    double n0 = 0.0;
    double r_ab = 0.0;
    /// Jamming power of b under H0. Half of p_max: the jammer fills both
    /// data periods (2 l_d symbols), so its average contribution matches
    /// the closed-form false-alarm exponent L(tau_min - tau)/(l_d p_max).
    double p_jam = 0.0;

    double beta_star = 0.0;
    double rho_ar = 1.0;
    double rho_rb = 1.0;

    double phi1 = 0.0;  // q_c / p_max
    double phi2 = 0.0;  // q_c rho_ar^2 / (4^R - 1) - n0
    double phi3 = 0.0;  // q_c rho_rb^2 / (4^R - 1) - n0
    double phi4 = 0.0;  // p_max (L - 2 l_d) / L, mean training+feedback power at w
    double phi5 = 0.0;  // ln(theta) = -2 lambda3 phi1

    double lambda1 = 0.0;  // 1 / (q_c (1 - rho_ar^2)(1 - beta)); +inf for a static channel
    double lambda2 = 0.0;  // 1 / (q_c beta)
    double lambda3 = 0.0;  // 1 / (1 - beta)
    double lambda4 = 0.0;  // 1 / (q_c (1 - rho_rb^2)(1 - beta))

    double theta = 0.0;  // P[H1]
};

struct PsiConstants {
    double psi0 = 0.0;  ///< J0(psi0) = |J0(psi1)|, psi0 below the first zero of J0
    double psi1 = 0.0;  ///< first trough of J0
};

double dbm_to_mw(double x_dbm);
double mw_to_dbm(double x_mw);

/// Bracketed root-finding on J0 and J0' = -J1; `tolerance` bounds the
/// bracket width in x.
PsiConstants compute_psi_constants(double tolerance);

/// Process-wide psi constants at 1e-12 tolerance, computed on first use.
const PsiConstants& psi_constants();

/// MMSE estimation-error variance N0 / (P_max L_t + N0).
double estimation_error_variance(const SystemConfig& cfg);

/// Mean lag between estimation and data symbols, (1/2 + L_f + L_d) delta.
double mean_feedback_delay(const SystemConfig& cfg, std::int64_t l_d);

/// Jakes correlation J0(2 pi f d).
double correlation_coefficient(double f, double d);

DerivedConstants derive_constants(const SystemConfig& cfg, double q_c, std::int64_t l_d);

/// Same bundle with the two correlation coefficients supplied directly
/// instead of being derived from Doppler and delay.
DerivedConstants derive_constants_with_rho(const SystemConfig& cfg, double q_c, std::int64_t l_d,
                                           double rho_ar, double rho_rb);

/// Real-valued bound psi0 / (2 pi max f delta) - L_f - 1/2 before flooring.
/// Infinite when both Doppler spreads are zero.
double data_symbols_bound(const SystemConfig& cfg);

/// Largest L_d for which success probability is monotone in L_d, clamped
/// to [0, cfg.ld_cap].
std::int64_t max_data_symbols(const SystemConfig& cfg);

/// True when max_data_symbols had to fall back to cfg.ld_cap.
bool data_symbols_capped(const SystemConfig& cfg);

}  // namespace covert
