#pragma once

namespace gctune {

// Standard normal lower tail, Phi(x).
double normal_cdf(double x);
// Upper tail 1 - Phi(x), accurate where Phi(x) rounds to 1.
double normal_sf(double x);
double normal_pdf(double x);
// Phi^-1(p) for p in (0, 1); returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

}  // namespace gctune
