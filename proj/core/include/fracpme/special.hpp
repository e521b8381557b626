#pragma once

namespace fracpme {

/// E_alpha(-x) for 0 < alpha <= 1 and x >= 0.
///
/// Power series for x <= 1; above that the completely monotone representation
///   E_alpha(-t^alpha) = int_0^inf e^{-rt} K_alpha(r) dr,
///   K_alpha(r) = sin(alpha pi) r^{alpha-1} / (pi (r^{2 alpha} + 2 r^alpha cos(alpha pi) + 1)).
double mittag_leffler_neg(double alpha, double x);

/// Relaxation profile u(t) = E_alpha(-lambda t^alpha).
double relaxation_oracle(double alpha, double lambda, double t);

}  // namespace fracpme
