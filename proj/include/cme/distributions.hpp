#pragma once

#include <cme/channel.hpp>

#include <utility>
#include <variant>
#include <vector>

namespace cme {

// Which map y -> g(y) plays the estimator in W = X - g(Y):
//   MatchedEstimator      the posterior mean of the channel itself;
//   PriorMismatchEstimator the posterior mean computed under a wrong prior
//                          (same noise level);
//   LinearEstimator       g(y) = slope * y.
struct MatchedEstimator {};
struct PriorMismatchEstimator {
    Prior prior;
};
struct LinearEstimator {
    double slope = 1.0;
};
using EstimatorDescriptor = std::variant<MatchedEstimator, PriorMismatchEstimator, LinearEstimator>;

// Law of the estimate itself, X_hat = E[X|Y]: change of variables through the
// strictly increasing posterior mean,
//   f(x) = f_Y(m^{-1}(x)) sigma^2 / Var(X | Y = m^{-1}(x)).
// Zero outside the open estimator range; the cdf clamps to 0/1 there.
double estimator_pdf(const ScalarChannel& ch, double x);
double estimator_cdf(const ScalarChannel& ch, double x);

// pdf/cdf tabulated on an inclusive nx-point grid across the estimator range.
struct EstimatorLaw {
    std::vector<double> x, pdf, cdf;
    std::pair<double, double> range{0, 0};
};
EstimatorLaw estimator_law(const ScalarChannel& ch, int nx);

// Density of the estimation error W = X - g(Y) at w, marginalizing the prior:
// for each prior point x, the g(Y)-density at x - w folds the noise through
// g^{-1}.
double error_pdf(const ScalarChannel& ch, const EstimatorDescriptor& desc, double w);

}  // namespace cme
