#include <cme/identities.hpp>

#include <cme/errors.hpp>
#include <cme/polybasis.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cme {

double conditional_cumulant(const ScalarChannel& ch, int k, double y) {
    if (k < 1 || k > poly::PartialBellTable::standard().max_order())
        throw std::invalid_argument("conditional_cumulant: order out of range");
    auto l = ch.log_density_derivatives(y, k);
    double s2 = ch.sigma2();
    if (k == 1) return y + s2 * l[0];
    if (k == 2) return s2 + s2 * s2 * l[1];
    return std::pow(s2, k) * l[k - 1];
}

double tre_mean(const ScalarChannel& ch, double y) { return conditional_cumulant(ch, 1, y); }

double hatsell_nolte_variance(const ScalarChannel& ch, double y) {
    return conditional_cumulant(ch, 2, y);
}

double moment_via_bell(const ScalarChannel& ch, int k, double y) {
    if (k < 0 || k > poly::PartialBellTable::standard().max_order())
        throw std::invalid_argument("moment_via_bell: order out of range");
    if (k == 0) return 1.0;
    auto l = ch.log_density_derivatives(y, k);
    double s2 = ch.sigma2();
    // Cumulants of X/sigma^2 given Y=y; their moment transform scales back to
    // E[X^k | Y=y].
    std::vector<double> scaled(k);
    scaled[0] = y / s2 + l[0];
    if (k >= 2) scaled[1] = 1.0 / s2 + l[1];
    for (int j = 3; j <= k; ++j) scaled[j - 1] = l[j - 1];
    auto mom = poly::cumulants_to_moments(scaled);
    return std::pow(s2, k) * mom[k - 1];
}

double moment_from_ratio_derivatives(std::span<const double> r, double sigma2, int k, double y) {
    if (k < 0) throw std::invalid_argument("moment_from_ratio_derivatives: order must be >= 0");
    if (int(r.size()) < k + 1)
        throw std::invalid_argument("moment_from_ratio_derivatives: too few ratios");
    if (!(sigma2 > 0))
        throw std::invalid_argument("moment_from_ratio_derivatives: noise level must be positive");
    if (k == 0) return 1.0;
    double s = std::sqrt(sigma2);
    double u = y / s;
    double acc = 0;
    for (int m = 0; m <= k; ++m)
        acc += poly::binomial(k, m) * r[k - m] * poly::hermite_g(m, u) / std::pow(s, m);
    return std::pow(sigma2, k) * acc;
}

double moment_via_generalized_tre(const ScalarChannel& ch, int k, double y) {
    if (k < 0) throw std::invalid_argument("moment_via_generalized_tre: order must be >= 0");
    if (k == 0) return 1.0;
    auto r = ch.density_ratio_derivatives(y, k);
    return moment_from_ratio_derivatives(r, ch.sigma2(), k, y);
}

double jaffer_step(const ScalarChannel& ch, int k, double y) {
    if (k < 0) throw std::invalid_argument("jaffer_step: order must be >= 0");
    auto r = ch.density_ratio_derivatives(y, k + 1);
    double s = ch.sigma(), s2 = ch.sigma2();
    double u = y / s;
    double mk = 0, dmk = 0;
    for (int m = 0; m <= k; ++m) {
        double c = poly::binomial(k, m) / std::pow(s, m);
        double g = poly::hermite_g(m, u);
        mk += c * r[k - m] * g;
        // d/dy (f^(j)/f) = f^(j+1)/f - (f^(j)/f)(f'/f); the Hermite factor
        // differentiates down one order.
        dmk += c * ((r[k - m + 1] - r[k - m] * r[1]) * g +
                    (m > 0 ? r[k - m] * m * poly::hermite_g(m - 1, u) / s : 0.0));
    }
    double sk = std::pow(s2, k);
    return s2 * sk * dmk + sk * mk * tre_mean(ch, y);
}

double ce_derivative(const ScalarChannel& ch, int k, double y) {
    if (k < 0 || k + 1 > poly::PartialBellTable::standard().max_order())
        throw std::invalid_argument("ce_derivative: order out of range");
    if (k == 0) return tre_mean(ch, y);
    double s2 = ch.sigma2();
    // Moments of X/sigma^2; the (k+1)-th cumulant of this sequence, scaled by
    // sigma^2, is the k-th mean derivative.
    std::vector<double> a(k + 1);
    for (int j = 1; j <= k + 1; ++j)
        a[j - 1] = moment_via_generalized_tre(ch, j, y) / std::pow(s2, j);
    auto kap = poly::moments_to_cumulants(a);
    return s2 * kap[k];
}

double conditional_cumulant_via_bell(const ScalarChannel& ch, int k, double y) {
    if (k < 1 || k > poly::PartialBellTable::standard().max_order())
        throw std::invalid_argument("conditional_cumulant_via_bell: order out of range");
    if (k == 1) return tre_mean(ch, y);
    return std::pow(ch.sigma2(), k - 1) * ce_derivative(ch, k - 1, y);
}

double CumulantBound::evaluate(double y) const { return a * std::pow(std::abs(y), k) + b; }

CumulantBound cumulant_bound(const Prior& prior, int k) {
    if (k < 1) throw std::invalid_argument("cumulant_bound: order must be >= 1");
    double e = std::max(k / 2.0 - 1.0, 1.0);
    double kk = std::pow(double(k), k);
    CumulantBound bd;
    bd.k = k;
    bd.a = kk * std::exp2(double(k - 1)) * (std::exp2(e) + 2.0);
    bd.b = kk * (std::exp2(e + k) * std::pow(prior_moment(prior, 2), k / 2.0) +
                 prior_abs_moment(prior, k));
    return bd;
}

std::vector<double> inverse_tre_density(const std::function<double(double)>& mean_fn,
                                        double sigma2, std::span<const double> grid) {
    if (!(sigma2 > 0)) throw std::invalid_argument("inverse_tre_density: sigma2 must be positive");
    size_t n = grid.size();
    if (n < 3) throw std::invalid_argument("inverse_tre_density: need at least three grid points");
    double h = grid[1] - grid[0];
    if (!(h > 0)) throw std::invalid_argument("inverse_tre_density: grid must be ascending");
    for (size_t i = 1; i < n; ++i)
        if (std::abs(grid[i] - grid[i - 1] - h) > 1e-9 * std::max(1.0, h))
            throw std::invalid_argument("inverse_tre_density: grid must be uniform");

    std::vector<double> g(n);
    for (size_t i = 0; i < n; ++i) g[i] = (mean_fn(grid[i]) - grid[i]) / sigma2;

    // Cumulative integral of g by composite Simpson over interval pairs; odd
    // interior points use the matching three-point rule, as does a trailing
    // odd interval.
    std::vector<double> cum(n, 0.0);
    for (size_t i = 0; i + 2 < n; i += 2) {
        cum[i + 1] = cum[i] + h / 12.0 * (5 * g[i] + 8 * g[i + 1] - g[i + 2]);
        cum[i + 2] = cum[i] + h / 3.0 * (g[i] + 4 * g[i + 1] + g[i + 2]);
    }
    if (n % 2 == 0)
        cum[n - 1] = cum[n - 2] + h / 12.0 * (-g[n - 3] + 8 * g[n - 2] + 5 * g[n - 1]);

    double cmax = *std::max_element(cum.begin(), cum.end());
    std::vector<double> dens(n);
    for (size_t i = 0; i < n; ++i) dens[i] = std::exp(cum[i] - cmax);
    double mass = 0;
    for (size_t i = 1; i < n; ++i) mass += 0.5 * (dens[i] + dens[i - 1]) * h;
    if (!(mass > 0) || !std::isfinite(mass))
        throw numeric_error("inverse_tre_density: reconstruction has no finite mass");
    for (auto& v : dens) v /= mass;
    return dens;
}

SlopeCheck slope_trace_bounds(const ScalarChannel& ch, double y, double support_radius) {
    if (!(support_radius > 0))
        throw std::invalid_argument("slope_trace_bounds: radius must be positive");
    SlopeCheck s;
    s.value = conditional_cumulant(ch, 2, y) / ch.sigma2();
    s.upper = support_radius * support_radius / ch.sigma2();
    double tol = 1e-10 * (1.0 + s.upper);
    s.ok = s.value >= -tol && s.value <= s.upper + tol;
    return s;
}

}  // namespace cme
