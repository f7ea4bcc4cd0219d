#include <cme/series.hpp>

#include <cme/errors.hpp>
#include <cme/identities.hpp>
#include <cme/polybasis.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>

namespace cme {

double PowerSeries::eval(double t) const {
    double u = t - center, acc = 0;
    for (size_t k = coeffs.size(); k-- > 0;) acc = acc * u + coeffs[k];
    return acc;
}

PowerSeries ce_series(const ScalarChannel& ch, double a, int order) {
    if (order < 1 || order + 1 > poly::PartialBellTable::standard().max_order())
        throw std::invalid_argument("ce_series: order out of range");
    auto l = ch.log_density_derivatives(a, order + 1);
    double s2 = ch.sigma2();
    PowerSeries out;
    out.center = a;
    out.coeffs.resize(order + 1);
    for (int k = 0; k <= order; ++k) {
        double kap;  // (k+1)-th posterior cumulant at a
        if (k == 0)
            kap = a + s2 * l[0];
        else if (k == 1)
            kap = s2 + s2 * s2 * l[1];
        else
            kap = std::pow(s2, k + 1) * l[k];
        out.coeffs[k] = kap / (poly::factorial(k) * std::pow(s2, k));
    }
    if (auto R = prior_support_radius(ch.prior()))
        out.radius = *R > 0 ? s2 / (2 * *R * std::numbers::e)
                            : std::numeric_limits<double>::infinity();
    else
        out.radius = std::numeric_limits<double>::infinity();
    return out;
}

PowerSeries lagrange_invert(const PowerSeries& s) {
    if (s.coeffs.size() < 2)
        throw std::invalid_argument("lagrange_invert: need at least a linear term");
    const int N = int(s.coeffs.size()) - 1;
    const double a1 = s.coeffs[1];
    if (a1 == 0 || !std::isfinite(a1))
        throw std::invalid_argument("lagrange_invert: vanishing linear term");

    // Scaled higher coefficients c_j = j! alpha_{j+1} / a1 drive the
    // Bell-polynomial expansion of the inverse's derivatives.
    std::vector<double> c(std::max(N - 1, 0));
    for (int j = 1; j <= N - 1; ++j) c[j - 1] = poly::factorial(j) * s.coeffs[j + 1] / a1;

    PowerSeries out;
    out.center = s.coeffs[0];
    out.coeffs.assign(N + 1, 0.0);
    out.coeffs[0] = s.center;
    out.coeffs[1] = 1.0 / a1;
    for (int n = 2; n <= N; ++n) {
        double acc = 0, rising = 1;
        for (int k = 1; k <= n - 1; ++k) {
            rising *= n + k - 1;  // n (n+1) ... (n+k-1)
            double B = poly::bell_partial(n - 1, k, std::span<const double>(c).first(n - k));
            acc += (k % 2 ? -1.0 : 1.0) * rising * B;
        }
        out.coeffs[n] = std::pow(out.coeffs[1], n) * acc / poly::factorial(n);
    }
    return out;
}

PowerSeries ce_inverse_series(const ScalarChannel& ch, double a, int order) {
    auto inv = lagrange_invert(ce_series(ch, a, order));
    double slope = hatsell_nolte_variance(ch, a) / ch.sigma2();
    double r = 8 * ch.y_stddev() * std::max(slope, 1e-8);
    bool certified = false;
    for (int iter = 0; iter < 80; ++iter, r /= 2) {
        bool ok = true;
        for (double frac : {0.25, 0.5, 0.75, 1.0}) {
            for (int sgn : {-1, 1}) {
                double x = inv.center + sgn * frac * r;
                double err = std::abs(tre_mean(ch, inv.eval(x)) - x);
                if (!(err <= 1e-7 * (1 + std::abs(x)))) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
        if (ok) {
            certified = true;
            break;
        }
    }
    inv.radius = certified ? r : 0.0;
    return inv;
}

std::pair<double, double> estimator_range(const ScalarChannel& ch) {
    double mu = prior_moment(ch.prior(), 1);
    double w = 10 * ch.y_stddev();
    return {tre_mean(ch, mu - w), tre_mean(ch, mu + w)};
}

double ce_inverse_eval(const ScalarChannel& ch, double x, double tol) {
    auto [lo, hi] = estimator_range(ch);
    if (!(x > lo && x < hi))
        throw std::domain_error("ce_inverse_eval: value outside the estimator range");
    double mu = prior_moment(ch.prior(), 1);
    double yl = mu - 10 * ch.y_stddev(), yh = mu + 10 * ch.y_stddev();
    double y = 0.5 * (yl + yh);
    for (int it = 0; it < 300; ++it) {
        double fy = tre_mean(ch, y) - x;
        if (std::abs(fy) <= tol * (1 + std::abs(x))) return y;
        (fy > 0 ? yh : yl) = y;
        double d = hatsell_nolte_variance(ch, y) / ch.sigma2();
        double cand = d > 0 ? y - fy / d : y;
        y = (cand > yl && cand < yh) ? cand : 0.5 * (yl + yh);
        if (yh - yl < 1e-15 * (1 + std::abs(y))) return y;
    }
    throw numeric_error("ce_inverse_eval: iteration did not converge");
}

}  // namespace cme
