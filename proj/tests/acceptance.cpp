// Acceptance gate: thirteen end-to-end criteria, one PASS/FAIL line each.
// Exit code is the number of failures.
#include <cme/channel.hpp>
#include <cme/distributions.hpp>
#include <cme/empirical_bayes.hpp>
#include <cme/identities.hpp>
#include <cme/lanczos.hpp>
#include <cme/mmse.hpp>
#include <cme/multivar.hpp>
#include <cme/polybasis.hpp>
#include <cme/quadrature.hpp>
#include <cme/series.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace cme;

namespace {

std::vector<double> grid(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

// Least-squares slope of log(err) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        double lx = std::log(x[i]), ly = std::log(err[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct Criterion {
    const char* label;
    double time_limit;  // seconds; 0 = unlimited
    std::function<bool(std::string&)> body;
};

// ---------------------------------------------------------------------------

bool crit_tre_closed_form(std::string& d) {
    ScalarChannel ch(TwoPointPrior{0.5}, 1.0);
    double worst = 0;
    for (double y : grid(-5, 5, 201))
        worst = std::max(worst, std::abs(tre_mean(ch, y) - std::tanh(y)));
    char buf[64];
    std::snprintf(buf, sizeof buf, "max|mean - tanh| = %.2e", worst);
    d = buf;
    return worst <= 1e-10;
}

bool crit_mollified_mean(std::string& d) {
    ScalarChannel ch(TwoPointPrior{0.5}, 1.0);
    auto logf = [&](double t) { return ch.log_marginal_density(t); };
    double e1 = 0, e5 = 0;
    for (double y : grid(-5, 5, 201)) {
        double exact = tre_mean(ch, y);
        e1 = std::max(e1, std::abs(y + lanczos_derivative(logf, {1, 0.1, 64}, y) - exact));
        e5 = std::max(e5, std::abs(y + lanczos_derivative(logf, {1, 0.5, 64}, y) - exact));
    }
    double ratio = e5 / e1;
    char buf[128];
    std::snprintf(buf, sizeof buf, "err(h=0.5)/err(h=0.1) = %.2f", ratio);
    d = buf;
    return ratio >= 12.0 && ratio <= 50.0;
}

bool crit_moment_equivalence(std::string& d) {
    ScalarChannel ch(DiscreteAtoms{{-2, 0, 2}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}, 1.0);
    PosteriorOracle oracle(ch);
    double worst = 0;
    for (int k = 1; k <= 4; ++k)
        for (double y : grid(-5, 5, 201)) {
            double a = moment_via_bell(ch, k, y);
            double b = moment_via_generalized_tre(ch, k, y);
            double c = oracle.moment(k, y);
            worst = std::max({worst, std::abs(a - b), std::abs(a - c), std::abs(b - c)});
        }
    char buf[64];
    std::snprintf(buf, sizeof buf, "max pairwise gap = %.2e", worst);
    d = buf;
    return worst <= 1e-6;
}

bool crit_cumulant_identity(std::string& d) {
    ScalarChannel ch(DiscreteAtoms{{-2, 0, 2}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}, 1.0);
    PosteriorOracle oracle(ch);
    double worst = 0;
    for (double y : grid(-5, 5, 201)) {
        std::vector<double> mom(4);
        for (int j = 1; j <= 4; ++j) mom[j - 1] = oracle.moment(j, y);
        std::vector<double> kap = poly::moments_to_cumulants(mom);
        for (int k = 1; k <= 4; ++k)
            worst = std::max(worst, std::abs(conditional_cumulant(ch, k, y) - kap[k - 1]));
    }
    ScalarChannel gauss(GaussianPrior{0.0, 1.0}, 1.0);
    double tail = 0;
    for (double y : grid(-5, 5, 201))
        tail = std::max({tail, std::abs(conditional_cumulant(gauss, 3, y)),
                         std::abs(conditional_cumulant(gauss, 4, y))});
    char buf[96];
    std::snprintf(buf, sizeof buf, "atoms gap %.2e, gaussian k>2 %.2e", worst, tail);
    d = buf;
    return worst <= 1e-5 && tail <= 1e-8;
}

bool crit_cumulant_ladder(std::string& d) {
    ScalarChannel ch(DiscreteAtoms{{-2, 0, 2}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}, 1.0);
    double worst = 0, h = 1e-4;
    for (int k = 1; k <= 3; ++k)
        for (double y : grid(-5, 5, 101)) {
            double fd = (conditional_cumulant(ch, k, y + h) - conditional_cumulant(ch, k, y - h)) /
                        (2 * h);
            worst = std::max(worst, std::abs(fd - conditional_cumulant(ch, k + 1, y)));
        }
    char buf[64];
    std::snprintf(buf, sizeof buf, "max ladder gap = %.2e", worst);
    d = buf;
    return worst <= 2e-4;
}

bool crit_inverse_series(std::string& d) {
    ScalarChannel ch(TwoPointPrior{0.3}, 1.0);
    double delta = 0.5 * std::log(0.3 / 0.7);
    PowerSeries inv = ce_inverse_series(ch, 0.0, 9);
    if (!(inv.radius > 0)) {
        d = "trust radius degenerate";
        return false;
    }
    double worst_cf = 0, worst_rt = 0;
    for (double frac : {-1.0, -0.5, -0.25, 0.25, 0.5, 1.0}) {
        double x = inv.center + frac * inv.radius;
        double got = inv.eval(x);
        worst_cf = std::max(worst_cf, std::abs(got - (std::atanh(x) - delta)));
        worst_rt = std::max(worst_rt, std::abs(tre_mean(ch, got) - x));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "closed-form gap %.2e, round-trip %.2e", worst_cf, worst_rt);
    d = buf;
    return worst_cf <= 1e-6 && worst_rt <= 1e-6;
}

bool crit_estimator_law(std::string& d) {
    ScalarChannel gauss(GaussianPrior{0.0, 1.0}, 1.0);
    EstimatorLaw law = estimator_law(gauss, 201);
    double v = 0.5, worst = 0;
    for (std::size_t i = 0; i < law.x.size(); ++i) {
        double x = law.x[i];
        double pdf = std::exp(-x * x / (2 * v)) / std::sqrt(2 * std::numbers::pi * v);
        double cdf = 0.5 * std::erfc(-x / std::sqrt(2 * v));
        if (i > 0 && i + 1 < law.x.size()) worst = std::max(worst, std::abs(law.pdf[i] - pdf));
        worst = std::max(worst, std::abs(law.cdf[i] - cdf));
    }
    if (worst > 1e-8) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "gaussian law gap %.2e", worst);
        d = buf;
        return false;
    }
    // Unit mass for each estimate density, and a monotone 0->1 cdf for the
    // five-atom prior.
    double mass_gap = 0;
    ScalarChannel atoms(DiscreteAtoms{{-6, -3, 0, 3, 6},
                                      {0.2, 0.2, 0.2, 0.2, 0.2}},
                        1.0);
    // Unit mass via the substitution x = m(y): the pdf composed with the mean
    // and the variance Jacobian must integrate like the marginal.  A wrong
    // inverse or Jacobian inside the pdf breaks this, and the integrand stays
    // smooth where the x-space density has near-endpoint spikes.
    // Window: where the marginal carries mass.  Far outside an atom prior's
    // support the mean plateaus at float resolution, so the bounded-support
    // window stops at support + 6 sigma (tail mass ~1e-10, well inside the
    // 1e-6 budget).  Depth 10 keeps the integrator from chasing the ~1e-12
    // jitter the pdf inherits from its internal root solve.
    std::pair<const ScalarChannel*, double> cases[] = {{&gauss, 10 * gauss.y_stddev() - 1e-6},
                                                       {&atoms, 12.0}};
    for (auto [ch, half] : cases) {
        double mass = quad::integrate_adaptive(
            [&](double y) {
                double jac = hatsell_nolte_variance(*ch, y) / ch->sigma2();
                if (jac == 0) return 0.0;
                return estimator_pdf(*ch, tre_mean(*ch, y)) * jac;
            },
            -half, half, 1e-8, 10);
        mass_gap = std::max(mass_gap, std::abs(mass - 1.0));
    }
    EstimatorLaw five = estimator_law(atoms, 201);
    bool monotone = five.cdf.front() <= 1e-6 && std::abs(five.cdf.back() - 1.0) <= 1e-6;
    for (std::size_t i = 1; i < five.cdf.size(); ++i)
        monotone = monotone && five.cdf[i] >= five.cdf[i - 1] - 1e-12;
    char buf[128];
    std::snprintf(buf, sizeof buf, "gaussian gap %.2e, mass gap %.2e, cdf %s", worst, mass_gap,
                  monotone ? "monotone" : "NOT monotone");
    d = buf;
    return mass_gap <= 1e-6 && monotone;
}

bool crit_error_law(std::string& d) {
    double worst_cf = 0, worst_mass = 0, worst_mean = 0, worst_m2 = 0;
    for (double p : {0.2, 0.4, 0.5}) {
        double s2 = 1.0;
        ScalarChannel ch(TwoPointPrior{p}, s2);
        auto phi = [&](double t) {
            return std::exp(-t * t / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2);
        };
        double lodds = std::log((1 - p) / p);
        for (double w : grid(-1.95, 1.95, 157)) {
            if (std::abs(w) < 0.03) continue;  // branch point
            double want = 0;
            if (w > 0 && w < 2) {
                double upl = (s2 / 2) * (std::log((2 - w) / w) + lodds) - 1;
                want += p * phi(upl) * s2 / (1 - (1 - w) * (1 - w));
            }
            if (w > -2 && w < 0) {
                double umi = (s2 / 2) * (std::log(-w / (2 + w)) + lodds) + 1;
                want += (1 - p) * phi(umi) * s2 / (1 - (1 + w) * (1 + w));
            }
            worst_cf = std::max(worst_cf, std::abs(error_pdf(ch, MatchedEstimator{}, w) - want));
        }
        // Moments of the error law against exact values.
        // Moments via the per-branch substitution w = x0 - m(y), x0 = +/-1:
        // smooth in y, and still exercises the pdf's inverse and Jacobian.
        auto piece = [&](int pow) {
            return quad::integrate_adaptive(
                [&](double y) {
                    double jac = hatsell_nolte_variance(ch, y) / s2;
                    double total = 0;
                    for (double x0 : {1.0, -1.0}) {
                        double w = x0 - tre_mean(ch, y);
                        double v = error_pdf(ch, MatchedEstimator{}, w) * jac;
                        for (int i = 0; i < pow; ++i) v *= w;
                        total += v;
                    }
                    return total;
                },
                -10.0, 10.0, 1e-8, 10);
        };
        worst_mass = std::max(worst_mass, std::abs(piece(0) - 1.0));
        worst_mean = std::max(worst_mean, std::abs(piece(1)));
        worst_m2 = std::max(worst_m2, std::abs(piece(2) - mmse_exact(ch)));
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "closed form %.2e, mass %.2e, mean %.2e, second moment %.2e",
                  worst_cf, worst_mass, worst_mean, worst_m2);
    d = buf;
    return worst_cf <= 1e-8 && worst_mass <= 1e-5 && worst_mean <= 1e-5 && worst_m2 <= 1e-4;
}

bool crit_mmse(std::string& d) {
    ScalarChannel gauss(GaussianPrior{0.0, 1.0}, 1.0);
    double m = mmse_exact(gauss), p = poincare_lower_bound(gauss);
    double overshoot = 0;
    for (double s2 : {0.1, 0.5, 1.0, 5.0, 100.0})
        for (int which : {0, 1}) {
            ScalarChannel ch(which ? Prior(GaussianPrior{0.0, 1.0}) : Prior(TwoPointPrior{0.5}),
                             s2);
            overshoot = std::max(overshoot, poincare_lower_bound(ch) - mmse_exact(ch));
        }
    char buf[160];
    std::snprintf(buf, sizeof buf, "mmse %.10f, lower %.8f, max(bound-mmse) %.2e", m, p,
                  overshoot);
    d = buf;
    return std::abs(m - 0.5) <= 1e-8 && std::abs(p - 0.375) <= 1e-6 && overshoot <= 0;
}

bool crit_mollifier_order(std::string& d) {
    std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
    double x = 0.3, slope_lo = 10, slope_hi = -10;
    bool bound_ok = true;
    for (int n = 1; n <= 4; ++n) {
        std::vector<double> errs;
        for (double h : hs) {
            double got = lanczos_derivative([](double t) { return std::exp(t); }, {n, h, 96}, x);
            double err = std::abs(got - std::exp(x));
            errs.push_back(err);
            // alpha-constant budget with sup|f^{(n+2)}| on [x-h, x+h]
            bound_ok = bound_ok && err <= lanczos_alpha(n) * std::exp(x + h) * h * h + 1e-9;
        }
        double s = loglog_slope(hs, errs);
        slope_lo = std::min(slope_lo, s);
        slope_hi = std::max(slope_hi, s);
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "slopes in [%.3f, %.3f], alpha budget %s", slope_lo, slope_hi,
                  bound_ok ? "holds" : "VIOLATED");
    d = buf;
    return slope_lo >= 1.9 && slope_hi <= 2.1 && bound_ok;
}

bool crit_density_reconstruction(std::string& d) {
    std::vector<double> ys = grid(-12, 12, 961);
    double worst = 0;
    for (int which : {0, 1}) {
        ScalarChannel ch(which ? Prior(TwoPointPrior{0.5}) : Prior(GaussianPrior{0.0, 1.0}), 1.0);
        auto rec = inverse_tre_density([&](double t) { return tre_mean(ch, t); }, ch.sigma2(), ys);
        // Renormalize the analytic density to the same trapezoid mass.
        std::vector<double> exact(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i) exact[i] = ch.marginal_density(ys[i]);
        double mass = 0;
        for (std::size_t i = 0; i + 1 < ys.size(); ++i)
            mass += 0.5 * (exact[i] + exact[i + 1]) * (ys[i + 1] - ys[i]);
        for (std::size_t i = 0; i < ys.size(); ++i)
            worst = std::max(worst, std::abs(rec[i] - exact[i] / mass));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "sup deviation = %.2e", worst);
    d = buf;
    return worst <= 1e-5;
}

bool crit_vector_battery(std::string& d) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst_thm = 0;
    for (int n : {2, 3}) {
        VectorAtoms a;
        a.points = MatrixXd(n, 6);
        a.probs = VectorXd(6);
        for (int j = 0; j < 6; ++j) {
            for (int i = 0; i < n; ++i) a.points(i, j) = 1.5 * unit(rng);
            a.probs[j] = 0.55 + 0.45 * unit(rng);
        }
        a.probs /= a.probs.sum();
        MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = unit(rng);
        VectorChannel ch(std::move(a), m.transpose() * m / n + 0.4 * MatrixXd::Identity(n, n));
        std::vector<UDescriptor> us;
        if (n == 2)
            us = {UDescriptor{{1, 0}}, UDescriptor{{0, 1}}, UDescriptor{{2, 1}},
                  UDescriptor{{0, 3}}};
        else
            us = {UDescriptor{{1, 0, 0}}, UDescriptor{{1, 1, 0}}, UDescriptor{{2, 0, 1}}};
        for (int t = 0; t < 20; ++t) {
            VectorXd y(n);
            for (int i = 0; i < n; ++i) y[i] = 2.0 * unit(rng);
            for (const auto& u : us)
                worst_thm = std::max(worst_thm, jacobian_identity_residual(ch, u, y));
        }
    }
    // Sphere covariance versus finite differences of the closed-form mean.
    double worst_sphere = 0, r = 1.2, s2 = 0.5;
    VectorChannel sph3(SphereUniform{r, 3}, s2 * MatrixXd::Identity(3, 3));
    for (int t = 0; t < 20; ++t) {
        VectorXd y(3);
        for (int i = 0; i < 3; ++i) y[i] = 2.0 * unit(rng);
        if (y.norm() < 0.3) y[0] += 1.0;
        MatrixXd v = sphere_second_cumulant(SphereUniform{r, 3}, s2, y);
        worst_sphere =
            std::max(worst_sphere, (v - s2 * mean_jacobian_fd(sph3, y)).cwiseAbs().maxCoeff());
    }
    // One-dimensional reduction at unit noise.
    double worst_red = 0, rr = 1.3;
    SphereUniform s1{rr, 1};
    for (double y : {-2.0, -0.7, 0.4, 1.6, 3.0}) {
        VectorXd yv = VectorXd::Constant(1, y);
        worst_red = std::max(worst_red, std::abs(sphere_mean_closed_form(s1, 1.0, yv)[0] -
                                                 rr * std::tanh(rr * y)));
        double sech = rr / std::cosh(rr * y);
        worst_red = std::max(
            worst_red, std::abs(sphere_second_cumulant(s1, 1.0, yv)(0, 0) - sech * sech));
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "gradient identity %.2e, sphere vs fd %.2e, reduction %.2e",
                  worst_thm, worst_sphere, worst_red);
    d = buf;
    return worst_thm <= 1e-4 && worst_sphere <= 1e-5 && worst_red <= 1e-8;
}

bool crit_eb_consistency(std::string& d) {
    ScalarChannel ch(TwoPointPrior{0.5}, 1.0);
    std::vector<int> ns{1000, 10000, 100000};
    std::string parts;
    bool ok = true;
    for (bool cumulants : {false, true}) {
        auto pts = consistency_experiment(ch, 1, ns, 20, 0.1, 0.05, cumulants, 20250822);
        std::vector<double> xs, es;
        bool decreasing = true;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            xs.push_back(pts[i].n);
            es.push_back(pts[i].median_sup_error);
            if (i > 0) decreasing = decreasing && pts[i].median_sup_error <
                                                      pts[i - 1].median_sup_error;
        }
        double slope = loglog_slope(xs, es);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s%s: medians %.3g/%.3g/%.3g slope %.3f",
                      parts.empty() ? "" : "; ", cumulants ? "kappa2" : "mean", es[0], es[1],
                      es[2], slope);
        parts += buf;
        ok = ok && decreasing && slope < 0;
    }
    d = parts;
    return ok;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria{
        {"posterior mean matches the binary closed form", 1.0, crit_tre_closed_form},
        {"mollified-derivative mean: error ratio h=0.5 vs h=0.1 in [12,50]", 5.0,
         crit_mollified_mean},
        {"three posterior-moment routes agree (atoms prior)", 5.0, crit_moment_equivalence},
        {"cumulants match the moment route; gaussian kills k>2", 5.0, crit_cumulant_identity},
        {"derivative ladder between consecutive cumulants", 0.0, crit_cumulant_ladder},
        {"series inverse of the mean: closed form and round-trip", 0.0, crit_inverse_series},
        {"estimate law: gaussian closed form, unit mass, monotone cdf", 0.0, crit_estimator_law},
        {"error density: binary closed form and first moments", 0.0, crit_error_law},
        {"mmse values and curvature lower bound", 10.0, crit_mmse},
        {"mollified derivative: second-order bias, alpha budget", 0.0, crit_mollifier_order},
        {"marginal density rebuilt from the mean", 0.0, crit_density_reconstruction},
        {"vector identities: gradient, sphere covariance, reduction", 0.0, crit_vector_battery},
        {"sample-based estimates: errors shrink with n", 300.0, crit_eb_consistency},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criteria[i].body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
        if (criteria[i].time_limit > 0 && secs > criteria[i].time_limit) {
            ok = false;
            detail += " [over time limit]";
        }
        std::printf("%s  %2zu  %-62s (%s, %.2fs)\n", ok ? "PASS" : "FAIL", i + 1,
                    criteria[i].label, detail.c_str(), secs);
        if (!ok) ++failures;
    }
    if (failures)
        std::printf("%d of %zu criteria FAILED\n", failures, criteria.size());
    else
        std::printf("all %zu criteria pass\n", criteria.size());
    return failures;
}
