#include <cme/infodensity.hpp>

#include <cme/identities.hpp>
#include <cme/polybasis.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cme {

double info_density(const ScalarChannel& ch, double x, double y) {
    double s2 = ch.sigma2();
    double d = y - x;
    double log_phi = -0.5 * std::log(2 * std::numbers::pi * s2) - d * d / (2 * s2);
    return log_phi - ch.log_marginal_density(y);
}

double info_density_dy(const ScalarChannel& ch, int k, double x, double y) {
    if (k < 0 || k > poly::PartialBellTable::standard().max_order())
        throw std::invalid_argument("info_density_dy: order out of range");
    if (k == 0) return info_density(ch, x, y);
    double s2 = ch.sigma2();
    if (k == 1) return (x - tre_mean(ch, y)) / s2;
    // The Gaussian kernel contributes only through order two; beyond that the
    // derivative is minus the log-density derivative.
    auto l = ch.log_density_derivatives(y, k);
    if (k == 2) return -1.0 / s2 - l[1];
    return -l[k - 1];
}

double log_set_prob_grad(const ScalarChannel& ch, const IntervalUnion& A, double y) {
    PosteriorOracle oracle(ch);
    return (oracle.set_moment(A, 1, y) - oracle.mean(y)) / ch.sigma2();
}

double log_set_prob_hess(const ScalarChannel& ch, const IntervalUnion& A, double y) {
    PosteriorOracle oracle(ch);
    double m1 = oracle.set_moment(A, 1, y);
    double set_var = oracle.set_moment(A, 2, y) - m1 * m1;
    double s4 = ch.sigma2() * ch.sigma2();
    return (set_var - oracle.variance(y)) / s4;
}

}  // namespace cme
