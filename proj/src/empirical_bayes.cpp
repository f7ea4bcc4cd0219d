#include <cme/empirical_bayes.hpp>

#include <cme/errors.hpp>
#include <cme/identities.hpp>
#include <cme/lanczos.hpp>
#include <cme/parallel.hpp>
#include <cme/polybasis.hpp>

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cme {

namespace {
constexpr double inv_sqrt_2pi = 0.39894228040143268;

double uniform01(std::mt19937_64& rng) {
    // 53 mantissa bits, shifted into the open unit interval.
    return (double(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double normal_quantile(double u) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2 * u); }
} // namespace

KdeModel::KdeModel(std::vector<double> samples, double bandwidth)
    : samples_(std::move(samples)), bandwidth_(bandwidth) {
    if (samples_.empty()) throw std::invalid_argument("KdeModel: need at least one sample");
    if (!(bandwidth_ > 0) || !std::isfinite(bandwidth_))
        throw std::invalid_argument("KdeModel: bandwidth must be positive");
}

double KdeModel::value(double y, int r) const {
    if (r < 0) throw std::invalid_argument("KdeModel::value: order must be >= 0");
    double acc = 0;
    for (double s : samples_) {
        double u = (y - s) / bandwidth_;
        acc += std::exp(-u * u / 2) * poly::hermite_he(r, u);
    }
    double sign = r % 2 ? -1.0 : 1.0;
    return sign * inv_sqrt_2pi * acc / (double(samples_.size()) * std::pow(bandwidth_, r + 1));
}

std::vector<double> KdeModel::ratio_derivatives(double y, int rmax) const {
    if (rmax < 0) throw std::invalid_argument("KdeModel::ratio_derivatives: order must be >= 0");
    std::vector<double> sums(rmax + 1, 0.0);
    for (double s : samples_) {
        double u = (y - s) / bandwidth_;
        double w = std::exp(-u * u / 2);
        double h_prev = 0, h = 1;
        for (int r = 0; r <= rmax; ++r) {
            sums[r] += w * h;
            double h_next = u * h - r * h_prev;
            h_prev = h;
            h = h_next;
        }
    }
    if (!(sums[0] > 0) || !std::isfinite(sums[0]))
        throw numeric_error("KdeModel: vanishing density at evaluation point");
    std::vector<double> out(rmax + 1);
    out[0] = 1.0;
    double apow = 1.0;
    for (int j = 1; j <= rmax; ++j) {
        apow *= bandwidth_;
        out[j] = (j % 2 ? -1.0 : 1.0) * sums[j] / (sums[0] * apow);
    }
    return out;
}

std::vector<double> draw_samples(const ScalarChannel& ch, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("draw_samples: need a positive count");
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    const Prior& p = ch.prior();
    double sigma = ch.sigma();
    for (int i = 0; i < n; ++i) {
        double u = uniform01(rng);
        double x;
        if (auto* at = std::get_if<DiscreteAtoms>(&p)) {
            size_t j = 0;
            double c = at->probs[0];
            while (j + 1 < at->points.size() && u > c) c += at->probs[++j];
            x = at->points[j];
        } else if (auto* tp = std::get_if<TwoPointPrior>(&p)) {
            x = u < tp->p ? 1.0 : -1.0;
        } else if (auto* gp = std::get_if<GaussianPrior>(&p)) {
            x = gp->mean + std::sqrt(gp->variance) * normal_quantile(u);
        } else {
            throw capability_error("draw_samples: unsupported prior");
        }
        out[i] = x + sigma * normal_quantile(uniform01(rng));
    }
    return out;
}

double eb_conditional_moment(const KdeModel& kde, double sigma2, int k, double y) {
    if (k < 0) throw std::invalid_argument("eb_conditional_moment: order must be >= 0");
    if (!(sigma2 > 0))
        throw std::invalid_argument("eb_conditional_moment: noise level must be positive");
    if (k == 0) return 1.0;
    auto r = kde.ratio_derivatives(y, k);
    return moment_from_ratio_derivatives(r, sigma2, k, y);
}

double eb_conditional_cumulant(const KdeModel& kde, double sigma2, int k, double y, double step) {
    if (k < 1) throw std::invalid_argument("eb_conditional_cumulant: order must be >= 1");
    if (k == 1) return eb_conditional_moment(kde, sigma2, 1, y);
    if (!(step > 0)) throw std::invalid_argument("eb_conditional_cumulant: step must be positive");
    auto mean = [&](double t) { return eb_conditional_moment(kde, sigma2, 1, t); };
    double d = lanczos_derivative(mean, LanczosOperator{k - 1, step}, y);
    return std::pow(sigma2, k - 1) * d;
}

namespace {
EbSchedule schedule_common(int n, int k, double u, double w, double sigma2) {
    if (n < 2) throw std::invalid_argument("eb schedule: need n >= 2");
    if (k < 1) throw std::invalid_argument("eb schedule: order must be >= 1");
    if (!(sigma2 > 0)) throw std::invalid_argument("eb schedule: noise level must be positive");
    if (!(w > 0) || !(w < u)) throw std::invalid_argument("eb schedule: need 0 < w < u");
    EbSchedule s;
    s.bandwidth = std::pow(double(n), -u);
    s.half_width = sigma2 * std::sqrt(w * std::log(double(n))) / 3;
    return s;
}
} // namespace

EbSchedule eb_moment_schedule(int n, int k, double u, double w, double sigma2) {
    if (!(u > 0) || !(u < 1.0 / (2 * k + 4)))
        throw std::invalid_argument("eb_moment_schedule: need 0 < u < 1/(2k+4)");
    return schedule_common(n, k, u, w, sigma2);
}

EbSchedule eb_cumulant_schedule(int n, int k, double u, double w, double sigma2) {
    if (!(u > 0) || !(u < 0.125))
        throw std::invalid_argument("eb_cumulant_schedule: need 0 < u < 1/8");
    EbSchedule s = schedule_common(n, k, u, w, sigma2);
    double worst = 0;
    for (int m = 0; m <= k; ++m)
        worst = std::max(worst, std::sqrt(4 * poly::factorial(m + 1) /
                                          (3 * std::numbers::pi * std::pow(sigma2, m + 1))));
    double eps_n = 2 * s.bandwidth * worst;
    // Keep the differentiation window inside the evaluation window.
    s.step = std::min(std::pow(eps_n, 1.0 / (k + 2)), s.half_width / 2);
    return s;
}

std::vector<ConsistencyPoint> consistency_experiment(const ScalarChannel& ch, int k,
                                                     std::span<const int> n_list, int n_seeds,
                                                     double u, double w, bool cumulants,
                                                     std::uint64_t base_seed, int grid_pts) {
    if (n_seeds < 1) throw std::invalid_argument("consistency_experiment: need seeds");
    if (grid_pts < 2) throw std::invalid_argument("consistency_experiment: need a grid");
    if (k < 1) throw std::invalid_argument("consistency_experiment: order must be >= 1");
    double s2 = ch.sigma2();
    std::vector<ConsistencyPoint> out;
    for (int n : n_list) {
        EbSchedule sched = cumulants ? eb_cumulant_schedule(n, k, u, w, s2)
                                     : eb_moment_schedule(n, k, u, w, s2);
        double t = sched.half_width;
        std::vector<double> truth(grid_pts), grid(grid_pts);
        for (int i = 0; i < grid_pts; ++i) {
            double y = -t + 2 * t * i / (grid_pts - 1);
            grid[i] = y;
            truth[i] = cumulants ? conditional_cumulant(ch, k + 1, y)
                                 : moment_via_generalized_tre(ch, k, y);
        }
        std::vector<double> errs(n_seeds);
        parallel_for(n_seeds, [&](int s) {
            std::uint64_t seed = base_seed ^ (std::uint64_t(n) * 0x9E3779B97F4A7C15ULL) ^
                                 ((std::uint64_t(s) + 1) * 0xBF58476D1CE4E5B9ULL);
            KdeModel kde(draw_samples(ch, n, seed), sched.bandwidth);
            double sup = 0;
            for (int i = 0; i < grid_pts; ++i) {
                double est = cumulants
                                 ? eb_conditional_cumulant(kde, s2, k + 1, grid[i], sched.step)
                                 : eb_conditional_moment(kde, s2, k, grid[i]);
                sup = std::max(sup, std::abs(est - truth[i]));
            }
            errs[s] = sup;
        });
        std::sort(errs.begin(), errs.end());
        double med = n_seeds % 2 ? errs[n_seeds / 2]
                                 : 0.5 * (errs[n_seeds / 2 - 1] + errs[n_seeds / 2]);
        out.push_back({n, med});
    }
    return out;
}

}  // namespace cme
