#pragma once

#include <cme/channel.hpp>

#include <utility>
#include <vector>

namespace cme {

// Truncated Taylor expansion sum_k coeffs[k] (t - center)^k.  `radius` marks
// the half-width of a certified evaluation region (analytic bound or measured
// round-trip accuracy, depending on the producer); 0 means uncalibrated.
struct PowerSeries {
    double center = 0;
    std::vector<double> coeffs;
    double radius = 0;

    double eval(double t) const;
};

// Expansion of the posterior mean y -> E[X|Y=y] around y = a; coefficient k
// is kappa(k+1)(a) / (k! sigma^{2k}).  For priors supported in [-A, A] the
// radius carries the convergence bound sigma^2 / (2 A e); a gaussian prior
// has an affine mean, so the radius is infinite.  1 <= order <= 11.
PowerSeries ce_series(const ScalarChannel& ch, double a, int order);

// Compositional inverse of a series with nonvanishing linear term, to the
// same truncation order: result.eval(x) ~ f^{-1}(x) around x = f(center).
PowerSeries lagrange_invert(const PowerSeries& s);

// Inverse expansion of the posterior mean around a, with a trust radius
// calibrated by halving until the forward round-trip error stays below 1e-7
// at probe points.
PowerSeries ce_inverse_series(const ScalarChannel& ch, double a, int order);

// Solve E[X|Y=y] = x for y by safeguarded Newton iteration; the mean slope
// Var(X|Y=y)/sigma^2 is the exact derivative.  Throws std::domain_error when
// x falls outside the estimator range.
double ce_inverse_eval(const ScalarChannel& ch, double x, double tol = 1e-12);

// Open interval swept by the posterior mean over ten output standard
// deviations around the prior mean.
std::pair<double, double> estimator_range(const ScalarChannel& ch);

}  // namespace cme
