// SPDX-License-Identifier: Apache-2.0
//
// Quadrature oracles for the closed forms in analytics.hpp. Each oracle
// integrates the defining probability integral directly (innermost
// dimension in elementary form, everything else numerically) and shares
// no algebra with the closed forms it certifies.
#pragma once

#include "covert/errors.hpp"
#include "covert/model.hpp"

namespace covert::verify {

class QuadratureFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    unsigned max_subdivisions = 15;  ///< maximum bisection depth per level
    /// Semi-infinite ranges end this many exponential scale lengths past
    /// their lower limit; the dropped tail is below exp(-radius).
    double truncation_radius = 40.0;
};

/// Throws InvalidArgument on non-positive tolerances or a truncation
/// radius too short for the requested absolute tolerance.
void validate(const QuadratureSpec& spec);

/// P[|h_ar|^2 P_max > Q_c, |h_rb|^2 P_max > Q_c] by integrating both
/// exponential tails.
double h1_probability_quadrature(const DerivedConstants& dc, const QuadratureSpec& spec = {});

/// End-to-end success probability: per hop, the joint probability of the
/// decoding event and H1, divided by P[H1]; hops multiplied.
double success_probability_quadrature(const DerivedConstants& dc, const QuadratureSpec& spec = {});

/// Miss-detection probability from the fourfold H1 integral with limits
/// in the order y1 (innermost), y2, y3, y4, divided by P[H1].
double miss_detection_quadrature(const DerivedConstants& dc, double tau,
                                 const QuadratureSpec& spec = {});

/// False-alarm probability from the tail of the jammer's data-period
/// energy under H0.
double false_alarm_quadrature(const DerivedConstants& dc, double tau,
                              const QuadratureSpec& spec = {});

}  // namespace covert::verify
