#pragma once

#include <cme/channel.hpp>

#include <functional>
#include <span>
#include <vector>

namespace cme {

// Posterior mean E[X | Y=y], read off the marginal density slope:
//   m(y) = y + sigma^2 (log f_Y)'(y).
double tre_mean(const ScalarChannel& ch, double y);

// Posterior variance Var(X | Y=y) = sigma^2 + sigma^4 (log f_Y)''(y),
// equivalently sigma^2 times the slope of the posterior mean.
double hatsell_nolte_variance(const ScalarChannel& ch, double y);

// k-th posterior cumulant of X given Y=y:
//   kappa(1) = m(y), kappa(2) = Var(X|Y=y),
//   kappa(k) = sigma^{2k} (log f_Y)^{(k)}(y) for k >= 3.
// Supported orders: 1 <= k <= 12.
double conditional_cumulant(const ScalarChannel& ch, int k, double y);

// Same quantity routed through the mean-derivative tower instead of the
// log-density derivatives; agreement is a nontrivial consistency check.
double conditional_cumulant_via_bell(const ScalarChannel& ch, int k, double y);

// Posterior moment E[X^k | Y=y] as a complete Bell polynomial in the scaled
// cumulants. Supported orders: 0 <= k <= 12.
double moment_via_bell(const ScalarChannel& ch, int k, double y);

// Posterior moment E[X^k | Y=y] via the Hermite expansion in density
// derivative ratios f^{(j)}/f:
//   E[X^k|Y=y] = sigma^{2k} sum_m C(k,m) (f^{(k-m)}/f)(y) G_m(y/sigma) / sigma^m.
double moment_via_generalized_tre(const ScalarChannel& ch, int k, double y);

// The same expansion fed with an externally supplied ratio sequence
// r[j] = f^{(j)}(y)/f(y), j = 0..k — the plug-in form shared by the
// density-estimate path.
double moment_from_ratio_derivatives(std::span<const double> r, double sigma2, int k, double y);

// One rung of the moment ladder: E[X^{k+1} | Y=y] from the level-k moment,
//   sigma^2 d/dy E[X^k|Y=y] + E[X^k|Y=y] E[X|Y=y],
// with the y-derivative taken analytically. k >= 0.
double jaffer_step(const ScalarChannel& ch, int k, double y);

// k-th derivative of the posterior mean in y, equal to kappa(k+1)/sigma^{2k}.
// Computed as a Bell-polynomial combination of scaled posterior moments.
// Supported orders: 0 <= k <= 11.
double ce_derivative(const ScalarChannel& ch, int k, double y);

// Growth envelope |kappa(k)(y)| <= a |y|^k + b, valid for priors with the
// needed moments; constants depend only on prior moments.
struct CumulantBound {
    int k = 1;
    double a = 0;
    double b = 0;
    double evaluate(double y) const;
};
CumulantBound cumulant_bound(const Prior& prior, int k);

// Reconstruct the marginal density on a uniform ascending grid from the
// posterior mean: f_Y proportional to exp(int (m(t) - t)/sigma^2 dt),
// normalized to unit trapezoid mass over the grid.
std::vector<double> inverse_tre_density(const std::function<double(double)>& mean_fn,
                                        double sigma2, std::span<const double> grid);

// Mean slope bracketed by zero below and R^2/sigma^2 above when the prior is
// supported in a ball of radius R.
struct SlopeCheck {
    double value = 0;  // d/dy E[X|Y=y]
    double upper = 0;  // R^2 / sigma^2
    bool ok = false;
};
SlopeCheck slope_trace_bounds(const ScalarChannel& ch, double y, double support_radius);

}  // namespace cme
