// SPDX-License-Identifier: Apache-2.0
#include "covert/verify.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace covert::verify {
namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

// Every level runs on [0, 1]: the recursion gives up on intervals that are
// short in absolute terms, and some of ours shrink with the parameters.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol, const QuadratureSpec& spec) {
    if (!(b > a)) {
        return 0.0;
    }
    const double width = b - a;
    auto unit = [&](double t) { return f(a + width * t); };
    double error = 0.0;
    double l1 = 0.0;
    const double value =
        width * Kronrod::integrate(unit, 0.0, 1.0, spec.max_subdivisions, rel_tol, &error, &l1);
    error *= width;
    l1 *= width;
    if (!std::isfinite(value) || error > std::max(spec.abs_tol, 10.0 * rel_tol * l1)) {
        throw QuadratureFailure("quadrature did not reach tolerance on [" + std::to_string(a) +
                                ", " + std::to_string(b) + "], error estimate " +
                                std::to_string(error));
    }
    return value;
}

// Inner levels run tighter than the outer one so that their error does not
// dominate the outer estimate.
double inner_tol(const QuadratureSpec& spec) { return spec.rel_tol * 1e-1; }

// Integral of rate * exp(-rate x) over [lo, lo + radius / rate].
double exponential_tail(double rate, double lo, const QuadratureSpec& spec) {
    auto pdf = [rate](double x) { return rate * std::exp(-rate * x); };
    return integrate(pdf, lo, lo + spec.truncation_radius / rate, spec.rel_tol, spec);
}

// P[x_a + x_e < phi_snr x_h, x_h > phi1]; innermost x_a in closed form,
// x_e and x_h numerically.
double hop_joint(double lambda_a, double lambda_err, double lambda3, double phi1, double phi_snr,
                 const QuadratureSpec& spec) {
    if (!(phi_snr > 0)) {
        return 0.0;
    }
    auto over_err = [&](double x_h) {
        const double s = phi_snr * x_h;
        auto integrand = [&](double x_e) {
            const double inner = std::isinf(lambda_a) ? 1.0 : -std::expm1(-lambda_a * (s - x_e));
            return lambda_err * std::exp(-lambda_err * x_e) * inner;
        };
        const double upper = std::min(s, spec.truncation_radius / lambda_err);
        return integrate(integrand, 0.0, upper, inner_tol(spec), spec);
    };
    auto outer = [&](double x_h) { return lambda3 * std::exp(-lambda3 * x_h) * over_err(x_h); };
    return integrate(outer, phi1, phi1 + spec.truncation_radius / lambda3, spec.rel_tol, spec);
}

}  // namespace

void validate(const QuadratureSpec& spec) {
    if (!(spec.rel_tol > 0) || !(spec.abs_tol > 0)) {
        throw InvalidArgument("quadrature tolerances must be > 0");
    }
    if (spec.max_subdivisions == 0) {
        throw InvalidArgument("quadrature needs at least one subdivision level");
    }
    if (!(std::exp(-spec.truncation_radius) <= spec.abs_tol / 10.0)) {
        throw InvalidArgument("truncation radius leaves a tail above abs_tol / 10");
    }
}

double h1_probability_quadrature(const DerivedConstants& dc, const QuadratureSpec& spec) {
    validate(spec);
    const double hop = exponential_tail(dc.lambda3, dc.phi1, spec);
    return hop * hop;
}

double success_probability_quadrature(const DerivedConstants& dc, const QuadratureSpec& spec) {
    validate(spec);
    if (dc.phi2 <= 0 || dc.phi3 <= 0) {
        return 0.0;
    }
    const double other_hop = exponential_tail(dc.lambda3, dc.phi1, spec);
    const double h1 = h1_probability_quadrature(dc, spec);
    const double first =
        hop_joint(dc.lambda1, dc.lambda2, dc.lambda3, dc.phi1, dc.phi2, spec) * other_hop / h1;
    const double second =
        hop_joint(dc.lambda4, dc.lambda2, dc.lambda3, dc.phi1, dc.phi3, spec) * other_hop / h1;
    return first * second;
}

double miss_detection_quadrature(const DerivedConstants& dc, double tau,
                                 const QuadratureSpec& spec) {
    validate(spec);
    const double tau_min = dc.phi4 + dc.n0;
    if (tau < tau_min) {
        throw InvalidArgument("miss-detection oracle needs tau >= tau_min");
    }
    if (dc.l_d <= 0) {
        throw InvalidArgument("miss-detection oracle needs l_d > 0");
    }
    // Statistic under H1: tau_min + (q_c l_d / L)(y1/y2 + y3/y4) < tau.
    const double limit = static_cast<double>(dc.l_block) * (tau - tau_min) /
                         (static_cast<double>(dc.l_d) * dc.q_c);
    if (limit == 0.0) {
        return 0.0;
    }
    const double l3 = dc.lambda3;
    const double reach = dc.phi1 + spec.truncation_radius / l3;

    auto over_y3 = [&](double y4) {
        auto over_y2 = [&](double y3) {
            const double c = limit - y3 / y4;
            auto y2_integrand = [&](double y2) {
                return l3 * std::exp(-l3 * y2) * -std::expm1(-c * y2);  // y1 done
            };
            return std::exp(-y3) * integrate(y2_integrand, dc.phi1, reach, inner_tol(spec),
                                             spec);
        };
        const double upper = std::min(limit * y4, spec.truncation_radius);
        return integrate(over_y2, 0.0, upper, inner_tol(spec), spec);
    };
    auto outer = [&](double y4) { return l3 * std::exp(-l3 * y4) * over_y3(y4); };
    const double joint = integrate(outer, dc.phi1, reach, spec.rel_tol, spec);
    return joint / h1_probability_quadrature(dc, spec);
}

double false_alarm_quadrature(const DerivedConstants& dc, double tau, const QuadratureSpec& spec) {
    validate(spec);
    const double tau_min = dc.phi4 + dc.n0;
    if (tau <= tau_min) {
        return 1.0;
    }
    if (dc.l_d <= 0) {
        return 0.0;
    }
    // H0 statistic: tau_min + (2 l_d / L) p_jam g with g ~ Exp(1).
    const double g_min = static_cast<double>(dc.l_block) * (tau - tau_min) /
                         (2.0 * static_cast<double>(dc.l_d) * dc.p_jam);
    if (g_min > spec.truncation_radius) {
        return 0.0;
    }
    auto pdf = [](double g) { return std::exp(-g); };
    return integrate(pdf, g_min, g_min + spec.truncation_radius, spec.rel_tol, spec);
}

}  // namespace covert::verify
