// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace covert {

/// Bessel function of the first kind, order zero. Absolute error below
/// 1e-10 for |x| <= 50; power series up to |x| = 12, Hankel asymptotic
/// expansion beyond.
double bessel_j0(double x);

/// Order-one companion of bessel_j0 (J0' = -J1), same accuracy regime.
double bessel_j1(double x);

}  // namespace covert
