#pragma once

#include <cme/channel.hpp>

namespace cme {

// Information density of the pair (x, y):
//   iota(x; y) = log( phi_{sigma2}(y - x) / f_Y(y) ).
double info_density(const ScalarChannel& ch, double x, double y);

// k-th partial derivative of iota in y.  k = 0 returns iota itself; the first
// derivative is the scaled estimation error (x - E[X|Y=y])/sigma^2; the
// second is -Var(X|Y=y)/sigma^4; higher orders are scaled log-density
// derivatives and no longer depend on x.  Supported orders: 0 <= k <= 12.
double info_density_dy(const ScalarChannel& ch, int k, double x, double y);

// First two y-derivatives of log P[X in A | Y = y]: the gradient is the mean
// shift (E[X|Y=y, A] - E[X|Y=y])/sigma^2, the curvature the variance shift
// (Var(X|Y=y, A) - Var(X|Y=y))/sigma^4.  Throws std::domain_error when the
// set carries no posterior mass.
double log_set_prob_grad(const ScalarChannel& ch, const IntervalUnion& A, double y);
double log_set_prob_hess(const ScalarChannel& ch, const IntervalUnion& A, double y);

}  // namespace cme
