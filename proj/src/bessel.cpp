// SPDX-License-Identifier: Apache-2.0
#include "covert/bessel.hpp"

#include <cmath>
#include <numbers>

namespace covert {
namespace {

constexpr double kSeriesLimit = 12.0;

// sum_k (-1)^k (x^2/4)^k / (k! (k+order)!), order in {0, 1}
double power_series(double x, int order) {
    const double q = -0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum) && std::abs(term) < 1e-17) {
            break;
        }
    }
    return order == 0 ? sum : 0.5 * x * sum;
}

// Hankel expansion for large positive x. Terms are summed while they keep
// shrinking; the series is asymptotic, so stopping at the smallest term
// bounds the error by that term.
double hankel(double x, int order) {
    const double mu = 4.0 * order * order;
    double p = 1.0;
    double q = 0.0;
    double a = 1.0;  // a_k / x^k
    double last = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = a * (mu - odd * odd) / (k * 8.0 * x);
        if (std::abs(next) >= std::abs(last)) {
            break;
        }
        a = next;
        last = next;
        // a_k contributes (-1)^{k/2} to P for even k and (-1)^{(k-1)/2} to Q for odd k.
        switch (k % 4) {
            case 0: p += a; break;
            case 1: q += a; break;
            case 2: p -= a; break;
            case 3: q -= a; break;
        }
        if (std::abs(a) < 1e-17) {
            break;
        }
    }
    const double chi = x - (0.5 * order + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j0(double x) {
    const double ax = std::abs(x);
    return ax <= kSeriesLimit ? power_series(ax, 0) : hankel(ax, 0);
}

double bessel_j1(double x) {
    const double ax = std::abs(x);
    const double v = ax <= kSeriesLimit ? power_series(ax, 1) : hankel(ax, 1);
    return x < 0 ? -v : v;
}

}  // namespace covert
