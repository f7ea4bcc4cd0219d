#include <cme/mmse.hpp>

#include <cme/errors.hpp>
#include <cme/identities.hpp>
#include <cme/infodensity.hpp>
#include <cme/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <variant>

namespace cme {

namespace {

// Integration window: prior spread plus twelve noise deviations.
std::pair<double, double> marginal_window(const ScalarChannel& ch) {
    const Prior& p = ch.prior();
    double lo = 0, hi = 0;
    if (auto* at = std::get_if<DiscreteAtoms>(&p)) {
        lo = *std::min_element(at->points.begin(), at->points.end());
        hi = *std::max_element(at->points.begin(), at->points.end());
    } else if (auto* gp = std::get_if<GaussianPrior>(&p)) {
        double sd = std::sqrt(gp->variance);
        lo = gp->mean - 12 * sd;
        hi = gp->mean + 12 * sd;
    } else if (std::holds_alternative<TwoPointPrior>(p)) {
        lo = -1;
        hi = 1;
    } else {
        throw capability_error("mmse: unsupported prior");
    }
    double pad = 12 * ch.sigma();
    return {lo - pad, hi + pad};
}

// Prior expectation of h, exact for discrete priors.
double prior_expect(const Prior& p, const std::function<double(double)>& h) {
    if (auto* at = std::get_if<DiscreteAtoms>(&p)) {
        double acc = 0;
        for (size_t i = 0; i < at->points.size(); ++i) acc += at->probs[i] * h(at->points[i]);
        return acc;
    }
    if (auto* tp = std::get_if<TwoPointPrior>(&p)) return tp->p * h(1.0) + (1 - tp->p) * h(-1.0);
    if (auto* gp = std::get_if<GaussianPrior>(&p))
        return quad::gauss_expect(h, gp->mean, gp->variance);
    throw capability_error("mmse: unsupported prior");
}

} // namespace

double mmse_exact(const ScalarChannel& ch) {
    auto [lo, hi] = marginal_window(ch);
    return quad::integrate_adaptive(
        [&](double y) { return hatsell_nolte_variance(ch, y) * ch.marginal_density(y); }, lo, hi,
        1e-9);
}

double poincare_lower_bound(const ScalarChannel& ch) {
    double s2 = ch.sigma2();
    auto conditional_var = [&](double x) {
        double m1 = quad::gauss_expect(
            [&](double y) { return info_density(ch, x, y); }, x, s2);
        double m2 = quad::gauss_expect(
            [&](double y) {
                double v = info_density(ch, x, y);
                return v * v;
            },
            x, s2);
        return std::max(m2 - m1 * m1, 0.0);
    };
    return s2 * prior_expect(ch.prior(), conditional_var);
}

MmseReport mmse_report(const ScalarChannel& ch) {
    MmseReport rep;
    double s2 = ch.sigma2();
    double s4 = s2 * s2;
    rep.sigma2 = s2;
    rep.mmse = mmse_exact(ch);

    rep.gradient_rep = s4 * prior_expect(ch.prior(), [&](double x) {
        return quad::gauss_expect(
            [&](double y) {
                double d = info_density_dy(ch, 1, x, y);
                return d * d;
            },
            x, s2);
    });

    auto [lo, hi] = marginal_window(ch);
    rep.hessian_rep = -s4 * quad::integrate_adaptive(
        [&](double y) { return info_density_dy(ch, 2, 0.0, y) * ch.marginal_density(y); },
        lo, hi, 1e-9);

    rep.poincare_lower = poincare_lower_bound(ch);
    return rep;
}

}  // namespace cme
