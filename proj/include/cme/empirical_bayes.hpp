#pragma once

#include <cme/channel.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace cme {

// Gaussian kernel density estimate over observed channel outputs, with
// analytic derivatives:
//   f^(r)(y) = (1/n) sum_i a^{-(r+1)} phi^(r)((y - Y_i)/a).
class KdeModel {
public:
    KdeModel(std::vector<double> samples, double bandwidth);

    double value(double y, int r) const;  // r-th derivative at y
    // { f^(j)(y)/f(y) : j = 0..rmax }, one pass over the samples.
    std::vector<double> ratio_derivatives(double y, int rmax) const;

    const std::vector<double>& samples() const { return samples_; }
    double bandwidth() const { return bandwidth_; }

private:
    std::vector<double> samples_;
    double bandwidth_;
};

// n channel outputs Y = X + N drawn by inverse-cdf sampling from a seeded
// 64-bit generator; identical seeds give identical draws.
std::vector<double> draw_samples(const ScalarChannel& ch, int n, std::uint64_t seed);

// Plug-in posterior moment: the Hermite-expansion formula evaluated on KDE
// density ratios instead of the analytic ones.
double eb_conditional_moment(const KdeModel& kde, double sigma2, int k, double y);

// Plug-in posterior cumulant: kappa(k) = sigma^{2(k-1)} times the (k-1)-th
// derivative of the plug-in mean, taken with the mollified differentiation
// operator at the given step.  k = 1 returns the plug-in mean directly.
double eb_conditional_cumulant(const KdeModel& kde, double sigma2, int k, double y, double step);

// Tuning schedule for sample size n: bandwidth a = n^{-u} and evaluation
// window |y| <= sigma^2 sqrt(w log n)/3.  Moment estimation admits
// u in (0, 1/(2k+4)); cumulant estimation needs u in (0, 1/8) and also picks
// the differentiation step, clipped to stay inside the window.
struct EbSchedule {
    double bandwidth = 0;
    double half_width = 0;
    double step = 0;
};
EbSchedule eb_moment_schedule(int n, int k, double u, double w, double sigma2);
EbSchedule eb_cumulant_schedule(int n, int k, double u, double w, double sigma2);

// For each sample size: draw `n_seeds` independent sample sets, measure the
// sup error of the plug-in estimate against the analytic truth on a uniform
// grid across the schedule window, and report the median over seeds.
// `cumulants` false: k-th conditional moment; true: (k+1)-th conditional
// cumulant via the schedule's differentiation step.
struct ConsistencyPoint {
    int n = 0;
    double median_sup_error = 0;
};
std::vector<ConsistencyPoint> consistency_experiment(const ScalarChannel& ch, int k,
                                                     std::span<const int> n_list, int n_seeds,
                                                     double u, double w, bool cumulants,
                                                     std::uint64_t base_seed, int grid_pts = 21);

}  // namespace cme
