#include <cme/distributions.hpp>

#include <cme/errors.hpp>
#include <cme/identities.hpp>
#include <cme/quadrature.hpp>
#include <cme/series.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cme {

double estimator_pdf(const ScalarChannel& ch, double x) {
    auto [lo, hi] = estimator_range(ch);
    if (!(x > lo && x < hi)) return 0.0;
    double y = ce_inverse_eval(ch, x);
    return ch.marginal_density(y) * ch.sigma2() / hatsell_nolte_variance(ch, y);
}

double estimator_cdf(const ScalarChannel& ch, double x) {
    auto [lo, hi] = estimator_range(ch);
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    return ch.marginal_cdf(ce_inverse_eval(ch, x));
}

EstimatorLaw estimator_law(const ScalarChannel& ch, int nx) {
    if (nx < 2) throw std::invalid_argument("estimator_law: need at least two grid points");
    EstimatorLaw law;
    law.range = estimator_range(ch);
    law.x.resize(nx);
    law.pdf.resize(nx);
    law.cdf.resize(nx);
    auto [lo, hi] = law.range;
    for (int i = 0; i < nx; ++i) {
        double x = lo + (hi - lo) * i / (nx - 1);
        law.x[i] = x;
        law.pdf[i] = estimator_pdf(ch, x);
        law.cdf[i] = estimator_cdf(ch, x);
    }
    return law;
}

namespace {

double noise_pdf(double u, double s2) {
    return std::exp(-u * u / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2);
}

// Density of g(Y) given X = x, for the estimator g described by `desc`
// applied to observations with noise level s2.
struct PushforwardDensity {
    const ScalarChannel& truth;
    const EstimatorDescriptor& desc;
    // Own the mismatched-prior channel when one is needed.
    std::optional<ScalarChannel> est;

    PushforwardDensity(const ScalarChannel& t, const EstimatorDescriptor& d) : truth(t), desc(d) {
        if (auto* mm = std::get_if<PriorMismatchEstimator>(&desc))
            est.emplace(mm->prior, truth.sigma2());
        else if (auto* lin = std::get_if<LinearEstimator>(&desc)) {
            if (lin->slope == 0)
                throw std::invalid_argument("error_pdf: linear estimator needs nonzero slope");
        }
    }

    double operator()(double v, double x) const {
        double s2 = truth.sigma2();
        if (auto* lin = std::get_if<LinearEstimator>(&desc)) {
            double s = lin->slope;
            return noise_pdf(v / s - x, s2) / std::abs(s);
        }
        const ScalarChannel& g = est ? *est : truth;
        auto [lo, hi] = estimator_range(g);
        if (!(v > lo && v < hi)) return 0.0;
        double y = ce_inverse_eval(g, v);
        return noise_pdf(y - x, s2) * s2 / hatsell_nolte_variance(g, y);
    }
};

} // namespace

double error_pdf(const ScalarChannel& ch, const EstimatorDescriptor& desc, double w) {
    PushforwardDensity push(ch, desc);
    auto h = [&](double x) { return push(x - w, x); };
    const Prior& p = ch.prior();
    if (auto* at = std::get_if<DiscreteAtoms>(&p)) {
        double acc = 0;
        for (size_t i = 0; i < at->points.size(); ++i) acc += at->probs[i] * h(at->points[i]);
        return acc;
    }
    if (auto* tp = std::get_if<TwoPointPrior>(&p))
        return tp->p * h(1.0) + (1 - tp->p) * h(-1.0);
    if (auto* gp = std::get_if<GaussianPrior>(&p))
        return quad::gauss_expect(h, gp->mean, gp->variance);
    throw capability_error("error_pdf: unsupported prior");
}

}  // namespace cme
