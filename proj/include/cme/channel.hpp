#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cme {

// Priors over the channel input X.

struct DiscreteAtoms {
    std::vector<double> points;
    std::vector<double> probs;
};

struct GaussianPrior {
    double mean = 0.0;
    double variance = 1.0;
};

// P(X = +1) = p, P(X = -1) = 1 - p.
struct TwoPointPrior {
    double p = 0.5;
};

// Uniform distribution on the sphere of the given radius in R^dim.
struct SphereUniform {
    double radius = 1.0;
    int dim = 1;
};

using Prior = std::variant<DiscreteAtoms, GaussianPrior, TwoPointPrior, SphereUniform>;

void validate(const Prior& p);  // throws std::invalid_argument on bad parameters

double prior_moment(const Prior& p, int k);      // E[X^k]
double prior_abs_moment(const Prior& p, int k);  // E[|X|^k]
double prior_variance(const Prior& p);
std::optional<double> prior_support_radius(const Prior& p);  // sup|X| when bounded

// Converts vector-capable priors to their scalar equivalent when one exists
// (dim-1 sphere -> two atoms); other priors pass through unchanged.
Prior scalarize(const Prior& p);

// Prior description files: `key = value` lines, `#` comments, list values
// either bracketed [a, b, c] or bare comma/space separated.
struct PriorSpec {
    Prior prior;
    std::optional<double> sigma2;
};
PriorSpec parse_prior_spec(const std::string& text);
PriorSpec load_prior_spec(const std::string& path);

// Finite union of closed intervals; used for conditioning events {X in A}.
struct IntervalUnion {
    std::vector<std::pair<double, double>> parts;

    static IntervalUnion le(double t);              // (-inf, t]
    static IntervalUnion ge(double t);              // [t, inf)
    static IntervalUnion between(double a, double b);
    static IntervalUnion outside(double t);         // |x| >= t
    bool contains(double x) const;
};

// Additive Gaussian-noise channel Y = X + N, N ~ N(0, sigma2), for scalar
// priors.  The marginal f_Y is an explicit Gaussian mixture, so all y
// derivatives are analytic; ratio/log-derivative accessors stay finite far
// into the tails where the raw density underflows.
class ScalarChannel {
public:
    ScalarChannel(Prior prior, double sigma2);

    double sigma2() const { return sigma2_; }
    double sigma() const;
    const Prior& prior() const { return prior_; }
    double y_stddev() const;  // sqrt(Var X + sigma2)

    // k-th derivative of the output density f_Y at y (k = 0: the density).
    double marginal_density(double y, int k = 0) const;
    double log_marginal_density(double y) const;
    double marginal_cdf(double y) const;

    // { f^(j)(y) / f(y) : j = 0..k }, evaluated in log space.
    std::vector<double> density_ratio_derivatives(double y, int k) const;

    // { (log f)^(j)(y) : j = 1..k }.
    std::vector<double> log_density_derivatives(double y, int k) const;

private:
    struct Component {
        double loc, logp, var;
    };
    Prior prior_;
    double sigma2_;
    std::vector<Component> comps_;
};

// Ground-truth conditional expectations computed directly from the prior:
// exact weighted sums over atoms, adaptive quadrature for continuous priors.
// Independent of the derivative-identity code paths it arbitrates.
struct QuadratureSpec {
    double abs_tol = 1e-10;
    int max_depth = 15;
};

class PosteriorOracle {
public:
    explicit PosteriorOracle(const ScalarChannel& ch, QuadratureSpec spec = {});

    double moment(int k, double y) const;      // E[X^k | Y = y]
    double mean(double y) const { return moment(1, y); }
    double variance(double y) const;
    double abs_moment(int k, double y) const;  // E[|X|^k | Y = y]

    double set_probability(const IntervalUnion& A, double y) const;      // P[X in A | Y = y]
    double set_moment(const IntervalUnion& A, int k, double y) const;    // E[X^k | Y = y, X in A]

private:
    const ScalarChannel* ch_;
    QuadratureSpec spec_;
};

} // namespace cme
