#pragma once

#include <cme/channel.hpp>

namespace cme {

// Minimum mean-square error E[(X - E[X|Y])^2], as the marginal integral of
// the posterior variance.
double mmse_exact(const ScalarChannel& ch);

// Lower bound sigma^2 E_X[ Var(iota(X; X+N) | X) ]: the conditional variance
// of the information density, integrated over the prior.
double poincare_lower_bound(const ScalarChannel& ch);

// The direct value next to two information-density representations:
//   gradient_rep = sigma^4 E[(d/dy iota)^2]   (double expectation over X, N)
//   hessian_rep  = -sigma^4 E[d^2/dy^2 iota]  (marginal integral)
// Both equal the mmse; computing them through the information-density code
// path makes the agreement a real check.
struct MmseReport {
    double sigma2 = 0;
    double mmse = 0;
    double gradient_rep = 0;
    double hessian_rep = 0;
    double poincare_lower = 0;
};
MmseReport mmse_report(const ScalarChannel& ch);

}  // namespace cme
