// SPDX-License-Identifier: Apache-2.0
#include "covert/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include <boost/math/tools/roots.hpp>

#include "covert/bessel.hpp"
#include "covert/errors.hpp"

namespace covert {
namespace {

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw InvalidArgument("invalid system configuration: " + what);
    }
}

double root_in(auto&& f, double lo, double hi, double tolerance) {
    std::uintmax_t iterations = 200;
    auto done = [tolerance](double a, double b) { return std::abs(b - a) <= tolerance; };
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, done, iterations);
    if (iterations >= 200) {
        throw NumericalError("psi root-finder did not converge");
    }
    return 0.5 * (a + b);
}

}  // namespace

void validate(const SystemConfig& cfg) {
    require(std::isfinite(cfg.p_max) && cfg.p_max > 0, "p_max must be > 0");
    require(std::isfinite(cfg.n0) && cfg.n0 > 0, "n0 must be > 0");
    require(cfg.l_t >= 1, "l_t must be >= 1");
    require(cfg.l_f >= 0, "l_f must be >= 0");
    require(std::isfinite(cfg.delta) && cfg.delta > 0, "delta must be > 0");
    require(std::isfinite(cfg.f_ar) && cfg.f_ar >= 0, "f_ar must be >= 0");
    require(std::isfinite(cfg.f_rb) && cfg.f_rb >= 0, "f_rb must be >= 0");
    require(std::isfinite(cfg.r_ab) && cfg.r_ab > 0, "r_ab must be > 0");
    require(cfg.epsilon >= 0 && cfg.epsilon < 1, "epsilon must lie in [0, 1)");
    require(cfg.ld_cap >= 0, "ld_cap must be >= 0");
}

double dbm_to_mw(double x_dbm) {
    if (!std::isfinite(x_dbm)) {
        throw InvalidArgument("power in dBm must be finite");
    }
    return std::pow(10.0, x_dbm / 10.0);
}

double mw_to_dbm(double x_mw) {
    if (!(x_mw > 0) || !std::isfinite(x_mw)) {
        throw InvalidArgument("power in mW must be positive and finite");
    }
    return 10.0 * std::log10(x_mw);
}

PsiConstants compute_psi_constants(double tolerance) {
    if (!(tolerance > 0)) {
        throw InvalidArgument("psi tolerance must be > 0");
    }
    // Zeros of J0 near 2.405 and 5.520 bracket the first trough.
    const double tight = std::min(tolerance, 1e-12);
    const double z1 = root_in([](double x) { return bessel_j0(x); }, 2.0, 3.0, tight);
    const double z2 = root_in([](double x) { return bessel_j0(x); }, 5.0, 6.0, tight);

    PsiConstants psi;
    psi.psi1 = root_in([](double x) { return bessel_j1(x); }, z1, z2, tolerance);
    const double level = std::abs(bessel_j0(psi.psi1));
    psi.psi0 = root_in([level](double x) { return bessel_j0(x) - level; }, 0.0, z1, tolerance);
    return psi;
}

const PsiConstants& psi_constants() {
    static const PsiConstants psi = compute_psi_constants(1e-12);
    return psi;
}

double estimation_error_variance(const SystemConfig& cfg) {
    validate(cfg);
    return cfg.n0 / (cfg.p_max * static_cast<double>(cfg.l_t) + cfg.n0);
}

double mean_feedback_delay(const SystemConfig& cfg, std::int64_t l_d) {
    if (l_d < 0) {
        throw InvalidArgument("l_d must be >= 0");
    }
    return (0.5 + static_cast<double>(cfg.l_f) + static_cast<double>(l_d)) * cfg.delta;
}

double correlation_coefficient(double f, double d) {
    if (!(f >= 0) || !(d >= 0)) {
        throw InvalidArgument("Doppler frequency and delay must be >= 0");
    }
    return bessel_j0(2.0 * std::numbers::pi * f * d);
}

DerivedConstants derive_constants(const SystemConfig& cfg, double q_c, std::int64_t l_d) {
    validate(cfg);
    if (l_d < 0) {
        throw InvalidArgument("l_d must be >= 0");
    }
    const double d = mean_feedback_delay(cfg, l_d);
    return derive_constants_with_rho(cfg, q_c, l_d, correlation_coefficient(cfg.f_ar, d),
                                     correlation_coefficient(cfg.f_rb, d));
}

DerivedConstants derive_constants_with_rho(const SystemConfig& cfg, double q_c, std::int64_t l_d,
                                           double rho_ar, double rho_rb) {
    validate(cfg);
    if (!(q_c > 0) || !std::isfinite(q_c)) {
        throw InvalidArgument("q_c must be > 0");
    }
    if (l_d < 0) {
        throw InvalidArgument("l_d must be >= 0");
    }
    if (!(std::abs(rho_ar) <= 1) || !(std::abs(rho_rb) <= 1)) {
        throw InvalidArgument("correlation coefficients must lie in [-1, 1]");
    }

    DerivedConstants dc;
    dc.q_c = q_c;
    dc.l_d = l_d;
    dc.l_block = 2 * cfg.l_t + cfg.l_f + 2 * l_d;
    dc.p_max = cfg.p_max;
    dc.n0 = cfg.n0;
    dc.r_ab = cfg.r_ab;
    dc.p_jam = 0.5 * cfg.p_max;

    dc.beta_star = estimation_error_variance(cfg);
    dc.rho_ar = rho_ar;
    dc.rho_rb = rho_rb;

    const double beta = dc.beta_star;
    const double sinr_target = std::pow(4.0, cfg.r_ab) - 1.0;
    const double l_block = static_cast<double>(dc.l_block);
    const double ra2 = rho_ar * rho_ar;
    const double rb2 = rho_rb * rho_rb;
    constexpr double inf = std::numeric_limits<double>::infinity();

    dc.lambda3 = 1.0 / (1.0 - beta);
    dc.phi1 = q_c / cfg.p_max;
    dc.phi2 = q_c * ra2 / sinr_target - cfg.n0;
    dc.phi3 = q_c * rb2 / sinr_target - cfg.n0;
    dc.phi4 = cfg.p_max * (l_block - 2.0 * static_cast<double>(l_d)) / l_block;
    dc.lambda1 = ra2 < 1.0 ? 1.0 / (q_c * (1.0 - ra2) * (1.0 - beta)) : inf;
    dc.lambda2 = 1.0 / (q_c * beta);
    dc.lambda4 = rb2 < 1.0 ? 1.0 / (q_c * (1.0 - rb2) * (1.0 - beta)) : inf;
    dc.theta = std::exp(-2.0 * q_c / (cfg.p_max * (1.0 - beta)));
    dc.phi5 = -2.0 * dc.lambda3 * dc.phi1;
    return dc;
}

double data_symbols_bound(const SystemConfig& cfg) {
    validate(cfg);
    const double f = std::max(cfg.f_ar, cfg.f_rb);
    if (f == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return psi_constants().psi0 / (2.0 * std::numbers::pi * f * cfg.delta) -
           static_cast<double>(cfg.l_f) - 0.5;
}

std::int64_t max_data_symbols(const SystemConfig& cfg) {
    const double bound = data_symbols_bound(cfg);
    if (!(bound < static_cast<double>(cfg.ld_cap))) {
        return cfg.ld_cap;
    }
    return std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(bound)));
}

bool data_symbols_capped(const SystemConfig& cfg) {
    return !(data_symbols_bound(cfg) < static_cast<double>(cfg.ld_cap));
}

}  // namespace covert
