// cme: reproduction front-end for the conditional-mean identity library.
// Every subcommand renders one deterministic CSV artifact; config echoes into
// `# key=value` header lines so a file is self-describing.  Exit codes:
// 0 success, 2 bad usage or validation, 3 numeric failure.
#include <CLI11.hpp>

#include <cme/channel.hpp>
#include <cme/distributions.hpp>
#include <cme/empirical_bayes.hpp>
#include <cme/errors.hpp>
#include <cme/identities.hpp>
#include <cme/infodensity.hpp>
#include <cme/lanczos.hpp>
#include <cme/mmse.hpp>
#include <cme/multivar.hpp>
#include <cme/parallel.hpp>
#include <cme/polybasis.hpp>
#include <cme/quadrature.hpp>
#include <cme/series.hpp>

#include <Eigen/Dense>

#include <clocale>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace cme;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_number(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(std::string(what) + ": cannot parse number '" + s + "'");
}

struct Grid {
    double lo = 0, hi = 0;
    int count = 0;
};

// "lo:hi:count" with count >= 2 and hi > lo.
Grid parse_grid(const std::string& s) {
    auto p2 = s.rfind(':');
    auto p1 = p2 == std::string::npos ? p2 : s.rfind(':', p2 - 1);
    if (p1 == std::string::npos || p1 == 0 || p2 <= p1 + 1 || p2 + 1 >= s.size())
        throw std::invalid_argument("grid: expected lo:hi:count, got '" + s + "'");
    Grid g;
    g.lo = parse_number(s.substr(0, p1), "grid lower bound");
    g.hi = parse_number(s.substr(p1 + 1, p2 - p1 - 1), "grid upper bound");
    double c = parse_number(s.substr(p2 + 1), "grid count");
    if (c != std::floor(c) || c < 2 || c > 1e7)
        throw std::invalid_argument("grid: count must be an integer >= 2");
    g.count = static_cast<int>(c);
    if (!(g.hi > g.lo)) throw std::invalid_argument("grid: need hi > lo");
    return g;
}

std::vector<double> linspace(const Grid& g) {
    std::vector<double> v(g.count);
    for (int i = 0; i < g.count; ++i)
        v[i] = g.lo + (g.hi - g.lo) * i / (g.count - 1);
    return v;
}

// Order lists: "3", "1..4", or comma-separated "1,2,4".
std::vector<int> parse_orders(const std::string& s) {
    auto parse_int = [](const std::string& t) {
        double v = parse_number(t, "order");
        if (v != std::floor(v) || v < 0 || v > 64)
            throw std::invalid_argument("order: expected a small nonnegative integer, got '" + t +
                                        "'");
        return static_cast<int>(v);
    };
    std::vector<int> out;
    if (auto dots = s.find(".."); dots != std::string::npos) {
        int a = parse_int(s.substr(0, dots)), b = parse_int(s.substr(dots + 2));
        if (b < a) throw std::invalid_argument("order range: need a..b with b >= a");
        for (int k = a; k <= b; ++k) out.push_back(k);
        return out;
    }
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(parse_int(tok));
    if (out.empty()) throw std::invalid_argument("order list is empty");
    return out;
}

// CSV sink: `# key=value` config lines, then a column header, then rows.
class Csv {
public:
    explicit Csv(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw std::invalid_argument("cannot open output file: " + path);
    }
    void meta(const std::string& key, const std::string& value) {
        out_ << "# " << key << "=" << value << "\n";
    }
    void meta(const std::string& key, double value) { meta(key, fmt(value)); }
    void columns(const std::string& names) { out_ << names << "\n"; }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
        ++rows_;
    }
    void finish() {
        out_.flush();
        if (!out_) throw std::runtime_error("failed writing " + path_);
        std::cout << "wrote " << path_ << " (" << rows_ << " rows)\n";
    }

private:
    std::string path_;
    std::ofstream out_;
    long rows_ = 0;
};

// Every prior-driven subcommand resolves its channel the same way: the file
// gives the prior (and maybe a noise level), --sigma2 overrides, default 1.
struct ChannelArgs {
    std::string prior_path;
    double sigma2_flag = 0;
    bool sigma2_set = false;

    ScalarChannel make() const {
        if (prior_path.empty()) throw std::invalid_argument("missing --prior");
        PriorSpec spec = load_prior_spec(prior_path);
        double s2 = sigma2_set ? sigma2_flag : spec.sigma2.value_or(1.0);
        return ScalarChannel(scalarize(spec.prior), s2);
    }
};

void add_channel_args(CLI::App* sub, ChannelArgs& a) {
    sub->add_option("--prior", a.prior_path, "prior description file");
    sub->add_option("--sigma2", a.sigma2_flag, "noise variance (overrides the file)")
        ->check(CLI::PositiveNumber)
        ->each([&a](const std::string&) { a.sigma2_set = true; });
}

void echo_channel(Csv& csv, const ChannelArgs& a, const ScalarChannel& ch) {
    csv.meta("prior", a.prior_path);
    csv.meta("sigma2", ch.sigma2());
}

// ---------------------------------------------------------------------------
// Curve subcommands

void run_moments(const ChannelArgs& ca, const std::string& grid_s, const std::string& k_s,
                 const std::string& out) {
    ScalarChannel ch = ca.make();
    Grid g = parse_grid(grid_s);
    std::vector<int> ks = parse_orders(k_s);
    PosteriorOracle oracle(ch);
    Csv csv(out);
    csv.meta("subcommand", "moments");
    echo_channel(csv, ca, ch);
    csv.meta("grid", grid_s);
    csv.meta("k", k_s);
    csv.columns("y,k,moment_bell,moment_hermite,moment_oracle");
    for (int k : ks)
        for (double y : linspace(g))
            csv.row({fmt(y), std::to_string(k), fmt(moment_via_bell(ch, k, y)),
                     fmt(moment_via_generalized_tre(ch, k, y)), fmt(oracle.moment(k, y))});
    csv.finish();
}

void run_cumulants(const ChannelArgs& ca, const std::string& grid_s, const std::string& k_s,
                   const std::string& out) {
    ScalarChannel ch = ca.make();
    Grid g = parse_grid(grid_s);
    std::vector<int> ks = parse_orders(k_s);
    int kmax = 0;
    for (int k : ks) {
        if (k < 1) throw std::invalid_argument("cumulants: orders start at 1");
        kmax = std::max(kmax, k);
    }
    PosteriorOracle oracle(ch);
    Csv csv(out);
    csv.meta("subcommand", "cumulants");
    echo_channel(csv, ca, ch);
    csv.meta("grid", grid_s);
    csv.meta("k", k_s);
    csv.columns("y,k,cumulant,cumulant_mean_derivative_path,cumulant_oracle");
    for (double y : linspace(g)) {
        std::vector<double> mom(kmax);
        for (int j = 1; j <= kmax; ++j) mom[j - 1] = oracle.moment(j, y);
        std::vector<double> kap = poly::moments_to_cumulants(mom);
        for (int k : ks)
            csv.row({fmt(y), std::to_string(k), fmt(conditional_cumulant(ch, k, y)),
                     fmt(conditional_cumulant_via_bell(ch, k, y)), fmt(kap[k - 1])});
    }
    csv.finish();
}

void run_inverse(const ChannelArgs& ca, const std::string& grid_s, const std::string& out) {
    ScalarChannel ch = ca.make();
    Grid g = parse_grid(grid_s);
    std::vector<double> ys = linspace(g);
    std::vector<double> rec = inverse_tre_density([&](double t) { return tre_mean(ch, t); },
                                                  ch.sigma2(), ys);
    // Exact marginal renormalized to the same trapezoid mass on this window,
    // so the two columns are comparable even when the grid clips tails.
    std::vector<double> exact(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) exact[i] = ch.marginal_density(ys[i]);
    double mass = 0;
    for (std::size_t i = 0; i + 1 < ys.size(); ++i)
        mass += 0.5 * (exact[i] + exact[i + 1]) * (ys[i + 1] - ys[i]);
    Csv csv(out);
    csv.meta("subcommand", "inverse");
    echo_channel(csv, ca, ch);
    csv.meta("grid", grid_s);
    csv.columns("y,density_reconstructed,density_exact");
    for (std::size_t i = 0; i < ys.size(); ++i)
        csv.row({fmt(ys[i]), fmt(rec[i]), fmt(exact[i] / mass)});
    csv.finish();
}

void run_pdf_ce(const ChannelArgs& ca, const std::string& grid_s, int points,
                const std::string& out) {
    ScalarChannel ch = ca.make();
    Csv csv(out);
    csv.meta("subcommand", "pdf-ce");
    echo_channel(csv, ca, ch);
    if (!grid_s.empty()) {
        Grid g = parse_grid(grid_s);
        csv.meta("grid", grid_s);
        csv.columns("x,pdf,cdf");
        for (double x : linspace(g))
            csv.row({fmt(x), fmt(estimator_pdf(ch, x)), fmt(estimator_cdf(ch, x))});
    } else {
        EstimatorLaw law = estimator_law(ch, points);
        csv.meta("points", std::to_string(points));
        csv.meta("range_lo", law.range.first);
        csv.meta("range_hi", law.range.second);
        csv.columns("x,pdf,cdf");
        for (std::size_t i = 0; i < law.x.size(); ++i)
            csv.row({fmt(law.x[i]), fmt(law.pdf[i]), fmt(law.cdf[i])});
    }
    csv.finish();
}

EstimatorDescriptor parse_estimator(const std::string& s) {
    if (s == "matched") return MatchedEstimator{};
    if (s.rfind("prior:", 0) == 0) {
        PriorSpec spec = load_prior_spec(s.substr(6));
        return PriorMismatchEstimator{scalarize(spec.prior)};
    }
    if (s.rfind("linear:", 0) == 0)
        return LinearEstimator{parse_number(s.substr(7), "estimator slope")};
    throw std::invalid_argument("estimator: expected matched | prior:PATH | linear:SLOPE, got '" +
                                s + "'");
}

void run_pdf_error(const ChannelArgs& ca, const std::string& grid_s, const std::string& est_s,
                   const std::string& out) {
    ScalarChannel ch = ca.make();
    EstimatorDescriptor est = parse_estimator(est_s);
    Grid g = parse_grid(grid_s);
    Csv csv(out);
    csv.meta("subcommand", "pdf-error");
    echo_channel(csv, ca, ch);
    csv.meta("grid", grid_s);
    csv.meta("estimator", est_s);
    csv.columns("w,pdf");
    for (double w : linspace(g)) csv.row({fmt(w), fmt(error_pdf(ch, est, w))});
    csv.finish();
}

void run_mmse(const ChannelArgs& ca, std::vector<double> levels, const std::string& grid_s,
              const std::string& out) {
    if (ca.prior_path.empty()) throw std::invalid_argument("missing --prior");
    PriorSpec spec = load_prior_spec(ca.prior_path);
    Prior prior = scalarize(spec.prior);
    if (!grid_s.empty()) levels = linspace(parse_grid(grid_s));
    if (levels.empty()) levels = {0.1, 0.5, 1.0, 5.0, 100.0};
    Csv csv(out);
    csv.meta("subcommand", "mmse");
    csv.meta("prior", ca.prior_path);
    if (!grid_s.empty()) csv.meta("grid", grid_s);
    csv.columns("sigma2,mmse,lower_bound");
    for (double s2 : levels) {
        if (!(s2 > 0)) throw std::invalid_argument("mmse: sigma2 must be positive");
        ScalarChannel ch(prior, s2);
        csv.row({fmt(s2), fmt(mmse_exact(ch)), fmt(poincare_lower_bound(ch))});
    }
    csv.finish();
}

void run_lanczos_demo(const ChannelArgs& ca, const std::string& grid_s,
                      std::vector<double> steps, const std::string& out) {
    // Default channel: the symmetric binary prior at unit noise.
    ScalarChannel ch = ca.prior_path.empty() ? ScalarChannel(TwoPointPrior{0.5}, 1.0)
                                             : ca.make();
    if (steps.empty()) steps = {0.1, 0.5};
    Grid g = parse_grid(grid_s);
    Csv csv(out);
    csv.meta("subcommand", "lanczos-demo");
    csv.meta("prior", ca.prior_path.empty() ? "builtin:two_point(0.5)" : ca.prior_path);
    csv.meta("sigma2", ch.sigma2());
    csv.meta("grid", grid_s);
    for (std::size_t i = 0; i < steps.size(); ++i)
        csv.meta("h" + std::to_string(i), steps[i]);
    csv.columns("y,h,mean_mollified,mean_exact,abs_error");
    auto logf = [&](double t) { return ch.log_marginal_density(t); };
    for (double h : steps) {
        if (!(h > 0)) throw std::invalid_argument("lanczos-demo: h must be positive");
        LanczosOperator op{1, h, 64};
        for (double y : linspace(g)) {
            double approx = y + ch.sigma2() * lanczos_derivative(logf, op, y);
            double exact = tre_mean(ch, y);
            csv.row({fmt(y), fmt(h), fmt(approx), fmt(exact), fmt(std::abs(approx - exact))});
        }
    }
    csv.finish();
}

// ---------------------------------------------------------------------------
// Empirical-Bayes sweeps: one row per (sample size, seed).

void run_eb(const ChannelArgs& ca, bool cumulants, int order, std::vector<int> ns, int n_seeds,
            double u, double w, std::uint64_t base_seed, const std::string& out) {
    ScalarChannel ch = ca.make();
    double s2 = ch.sigma2();
    if (ns.empty()) ns = {1000, 10000, 100000};
    if (n_seeds < 1) throw std::invalid_argument("need --seeds >= 1");
    int base = cumulants ? order - 1 : order;
    if (base < 1)
        throw std::invalid_argument(cumulants ? "eb-cumulants: order starts at 2"
                                              : "eb-moments: order starts at 1");
    const int grid_pts = 21;
    Csv csv(out);
    csv.meta("subcommand", cumulants ? "eb-cumulants" : "eb-moments");
    echo_channel(csv, ca, ch);
    csv.meta("k", std::to_string(order));
    csv.meta("u", u);
    csv.meta("w", w);
    csv.meta("seeds", std::to_string(n_seeds));
    csv.meta("base_seed", std::to_string(base_seed));
    csv.meta("grid_pts", std::to_string(grid_pts));
    csv.columns("n,seed,k,sup_error,t_n,a,h");
    for (int n : ns) {
        EbSchedule sched = cumulants ? eb_cumulant_schedule(n, base, u, w, s2)
                                     : eb_moment_schedule(n, base, u, w, s2);
        double t = sched.half_width;
        std::vector<double> grid(grid_pts), truth(grid_pts);
        for (int i = 0; i < grid_pts; ++i) {
            grid[i] = -t + 2 * t * i / (grid_pts - 1);
            truth[i] = cumulants ? conditional_cumulant(ch, order, grid[i])
                                 : moment_via_generalized_tre(ch, order, grid[i]);
        }
        std::vector<double> sups(n_seeds);
        std::vector<std::uint64_t> seeds(n_seeds);
        parallel_for(n_seeds, [&](int s) {
            std::uint64_t seed = base_seed ^ (std::uint64_t(n) * 0x9E3779B97F4A7C15ULL) ^
                                 ((std::uint64_t(s) + 1) * 0xBF58476D1CE4E5B9ULL);
            seeds[s] = seed;
            KdeModel kde(draw_samples(ch, n, seed), sched.bandwidth);
            double sup = 0;
            for (int i = 0; i < grid_pts; ++i) {
                double est = cumulants
                                 ? eb_conditional_cumulant(kde, s2, order, grid[i], sched.step)
                                 : eb_conditional_moment(kde, s2, base, grid[i]);
                sup = std::max(sup, std::abs(est - truth[i]));
            }
            sups[s] = sup;
        });
        for (int s = 0; s < n_seeds; ++s)
            csv.row({std::to_string(n), std::to_string(seeds[s]), std::to_string(order),
                     fmt(sups[s]), fmt(t), fmt(sched.bandwidth),
                     fmt(cumulants ? sched.step : 0.0)});
    }
    csv.finish();
}

// ---------------------------------------------------------------------------
// Identity batteries

struct BatteryRow {
    std::string name;
    int dim = 0;
    double residual = 0;
    double tol = 0;
    bool pass() const { return residual <= tol; }
};

void report_battery(const std::vector<BatteryRow>& rows, bool with_dim, const std::string& out,
                    const std::string& subcommand) {
    double worst = 0;
    bool all = true;
    for (const auto& r : rows) {
        std::printf("%-34s %12.3e  tol %8.1e  %s\n", r.name.c_str(), r.residual, r.tol,
                    r.pass() ? "pass" : "FAIL");
        worst = std::max(worst, r.residual);
        all = all && r.pass();
    }
    std::printf("max residual %.3e — %s\n", worst, all ? "all checks pass" : "FAILURES present");
    if (!out.empty()) {
        Csv csv(out);
        csv.meta("subcommand", subcommand);
        csv.columns(with_dim ? "check,dim,residual,tolerance,pass" : "check,residual,tolerance,pass");
        for (const auto& r : rows) {
            std::vector<std::string> cells{r.name};
            if (with_dim) cells.push_back(std::to_string(r.dim));
            cells.push_back(fmt(r.residual));
            cells.push_back(fmt(r.tol));
            cells.push_back(r.pass() ? "1" : "0");
            csv.row(cells);
        }
        csv.finish();
    }
    if (!all) throw numeric_error("identity battery reported failures");
}

int run_check(const std::string& out) {
    std::vector<BatteryRow> rows;
    auto grid = [](double lo, double hi, int n) {
        Grid g{lo, hi, n};
        return linspace(g);
    };

    {  // posterior mean against the binary closed form
        ScalarChannel ch(TwoPointPrior{0.5}, 1.0);
        double r = 0;
        for (double y : grid(-5, 5, 201)) r = std::max(r, std::abs(tre_mean(ch, y) - std::tanh(y)));
        rows.push_back({"mean_binary_closed_form", 0, r, 1e-10});
    }
    ScalarChannel atoms(DiscreteAtoms{{-2, 0, 2}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}, 1.0);
    PosteriorOracle oracle(atoms);
    {  // three routes to the posterior moments
        double r = 0;
        for (int k = 1; k <= 4; ++k)
            for (double y : grid(-5, 5, 101)) {
                double a = moment_via_bell(atoms, k, y);
                double b = moment_via_generalized_tre(atoms, k, y);
                double c = oracle.moment(k, y);
                r = std::max({r, std::abs(a - b), std::abs(a - c), std::abs(b - c)});
            }
        rows.push_back({"moment_equivalence", 0, r, 1e-6});
    }
    {  // cumulants against moment-routed oracle values
        double r = 0;
        for (double y : grid(-5, 5, 101)) {
            std::vector<double> mom(4);
            for (int j = 1; j <= 4; ++j) mom[j - 1] = oracle.moment(j, y);
            std::vector<double> kap = poly::moments_to_cumulants(mom);
            for (int k = 1; k <= 4; ++k)
                r = std::max(r, std::abs(conditional_cumulant(atoms, k, y) - kap[k - 1]));
        }
        rows.push_back({"cumulant_identity", 0, r, 1e-5});
    }
    {  // gaussian prior kills every cumulant above the second
        ScalarChannel ch(GaussianPrior{0.0, 1.0}, 1.0);
        double r = 0;
        for (double y : grid(-5, 5, 101))
            r = std::max({r, std::abs(conditional_cumulant(ch, 3, y)),
                          std::abs(conditional_cumulant(ch, 4, y))});
        rows.push_back({"gaussian_higher_cumulants", 0, r, 1e-8});
    }
    {  // ladder: sigma2 d/dy kappa_k = kappa_{k+1}
        double r = 0, h = 1e-4;
        for (int k = 1; k <= 3; ++k)
            for (double y : grid(-4, 4, 41)) {
                double fd = (conditional_cumulant(atoms, k, y + h) -
                             conditional_cumulant(atoms, k, y - h)) /
                            (2 * h);
                r = std::max(r, std::abs(fd - conditional_cumulant(atoms, k + 1, y)));
            }
        rows.push_back({"cumulant_ladder", 0, r, 2e-4});
    }
    {  // inverting the posterior mean round-trips
        ScalarChannel ch(TwoPointPrior{0.3}, 1.0);
        double r = 0;
        for (double y : grid(-3, 3, 61))
            r = std::max(r, std::abs(ce_inverse_eval(ch, tre_mean(ch, y)) - y));
        rows.push_back({"inverse_round_trip", 0, r, 1e-6});
    }
    {  // gaussian estimate law is the shrunk normal
        ScalarChannel ch(GaussianPrior{0.0, 1.0}, 1.0);
        EstimatorLaw law = estimator_law(ch, 201);
        double r = 0, v = 0.5;
        for (std::size_t i = 0; i < law.x.size(); ++i) {
            double x = law.x[i];
            double pdf = std::exp(-x * x / (2 * v)) / std::sqrt(2 * std::numbers::pi * v);
            double cdf = 0.5 * std::erfc(-x / std::sqrt(2 * v));
            if (i > 0 && i + 1 < law.x.size())
                r = std::max(r, std::abs(law.pdf[i] - pdf));
            r = std::max(r, std::abs(law.cdf[i] - cdf));
        }
        rows.push_back({"gaussian_estimate_law", 0, r, 1e-8});
    }
    {  // binary matched error density against the closed form
        double p = 0.4, s2 = 1.0;
        ScalarChannel ch(TwoPointPrior{p}, s2);
        double r = 0;
        for (double w : grid(-1.9, 1.9, 77)) {
            double got = error_pdf(ch, MatchedEstimator{}, w);
            auto phi = [&](double t) {
                return std::exp(-t * t / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2);
            };
            double want = 0;
            double lodds = std::log((1 - p) / p);
            if (w > 0 && w < 2) {
                double upl = (s2 / 2) * (std::log((2 - w) / w) + lodds) - 1;
                want += p * phi(upl) * s2 / (1 - (1 - w) * (1 - w));
            }
            if (w > -2 && w < 0) {
                double umi = (s2 / 2) * (std::log(-w / (2 + w)) + lodds) + 1;
                want += (1 - p) * phi(umi) * s2 / (1 - (1 + w) * (1 + w));
            }
            r = std::max(r, std::abs(got - want));
        }
        rows.push_back({"binary_error_density", 0, r, 1e-8});
    }
    {  // gaussian minimum error and its curvature lower bound
        ScalarChannel ch(GaussianPrior{0.0, 1.0}, 1.0);
        rows.push_back({"gaussian_mmse", 0, std::abs(mmse_exact(ch) - 0.5), 1e-8});
        rows.push_back(
            {"gaussian_poincare_value", 0, std::abs(poincare_lower_bound(ch) - 0.375), 1e-6});
    }
    {  // lower bound stays below the mmse across noise levels and priors
        double r = 0;
        for (double s2 : {0.1, 0.5, 1.0, 5.0, 100.0})
            for (int which : {0, 1}) {
                ScalarChannel ch(which ? Prior(GaussianPrior{0.0, 1.0}) : Prior(TwoPointPrior{0.5}),
                                 s2);
                r = std::max(r, poincare_lower_bound(ch) - mmse_exact(ch));
            }
        rows.push_back({"poincare_below_mmse", 0, std::max(r, 0.0), 1e-12});
    }
    report_battery(rows, false, out, "check");
    return 0;
}

int run_vector_check(std::uint64_t seed, const std::string& out) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    std::vector<BatteryRow> rows;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto rand_vec = [&](int n, double scale) {
        VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = scale * unit(rng);
        return v;
    };
    auto rand_spd = [&](int n) {
        MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = unit(rng);
        return MatrixXd(a.transpose() * a / n + 0.4 * MatrixXd::Identity(n, n));
    };
    auto rand_atoms = [&](int n, int m) {
        VectorAtoms a;
        a.points = MatrixXd(n, m);
        a.probs = VectorXd(m);
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < n; ++i) a.points(i, j) = 1.5 * unit(rng);
            a.probs[j] = 0.55 + 0.45 * unit(rng);
        }
        a.probs /= a.probs.sum();
        return a;
    };

    {  // dim-1 sphere equals the two-atom closed form
        double r = 1.3, s2 = 0.7, worst = 0;
        SphereUniform sph{r, 1};
        for (double y : {-2.0, -0.5, 0.4, 1.7}) {
            VectorXd yv = VectorXd::Constant(1, y);
            worst = std::max(worst, std::abs(sphere_mean_closed_form(sph, s2, yv)[0] -
                                             r * std::tanh(r * y / s2)));
            double sech = 1.0 / std::cosh(r * std::abs(y) / s2);
            worst = std::max(worst, std::abs(sphere_second_cumulant(sph, s2, yv)(0, 0) -
                                             r * r * sech * sech));
        }
        rows.push_back({"sphere_scalar_reduction", 1, worst, 1e-8});
    }
    for (int n : {2, 3}) {  // gradient identity for monomial observables
        VectorChannel ch(rand_atoms(n, 6), rand_spd(n));
        double worst = 0;
        std::vector<UDescriptor> us;
        if (n == 2)
            us = {UDescriptor{{1, 0}}, UDescriptor{{0, 1}}, UDescriptor{{2, 1}},
                  UDescriptor{{0, 3}}};
        else
            us = {UDescriptor{{1, 0, 0}}, UDescriptor{{1, 1, 0}}, UDescriptor{{2, 0, 1}}};
        for (int t = 0; t < 20; ++t) {
            VectorXd y = rand_vec(n, 2.0);
            for (const auto& u : us)
                worst = std::max(worst, jacobian_identity_residual(ch, u, y));
            worst = std::max(worst, (mean_jacobian_fd(ch, y) -
                                     posterior_variance(ch, y) * ch.noise_cov_inv())
                                        .cwiseAbs()
                                        .maxCoeff());
        }
        rows.push_back({"gradient_identity_monomials", n, worst, 1e-4});
    }
    for (int n : {2, 3}) {  // matrix second-moment ladder
        VectorChannel ch(rand_atoms(n, 5), rand_spd(n));
        double worst = 0;
        for (int t = 0; t < 20; ++t)
            worst = std::max(worst, matrix_jaffer_residual(ch, rand_vec(n, 2.0)));
        rows.push_back({"second_moment_ladder", n, worst, 1e-4});
    }
    {  // sphere covariance against mean derivatives in R^3
        double r = 1.2, s2 = 0.5, worst = 0;
        VectorChannel ch(SphereUniform{r, 3}, s2 * MatrixXd::Identity(3, 3));
        for (int t = 0; t < 12; ++t) {
            VectorXd y = rand_vec(3, 2.0);
            if (y.norm() < 0.3) y[0] += 1.0;
            MatrixXd v = sphere_second_cumulant(SphereUniform{r, 3}, s2, y);
            worst = std::max(worst, (v - s2 * mean_jacobian_fd(ch, y)).cwiseAbs().maxCoeff());
        }
        rows.push_back({"sphere_covariance_vs_mean", 3, worst, 1e-5});
    }
    {  // gaussian product-grid prior: shrinkage matrix (I + K)^{-1}
        auto& rule = quad::gauss_hermite(24);
        int m = 24 * 24;
        VectorAtoms a;
        a.points = MatrixXd(2, m);
        a.probs = VectorXd(m);
        for (int j = 0; j < m; ++j) {
            a.points(0, j) = std::numbers::sqrt2 * rule.x[j % 24];
            a.points(1, j) = std::numbers::sqrt2 * rule.x[j / 24];
            a.probs[j] = rule.w[j % 24] * rule.w[j / 24];
        }
        a.probs /= a.probs.sum();
        MatrixXd k(2, 2);
        k << 0.8, 0.3, 0.3, 1.5;
        VectorChannel ch(std::move(a), k);
        MatrixXd shrink = (MatrixXd::Identity(2, 2) + k).inverse();
        double worst = 0;
        for (int t = 0; t < 6; ++t) {
            VectorXd y = rand_vec(2, 1.5);
            worst = std::max(worst, (vector_tre_mean(ch, y) - shrink * y).cwiseAbs().maxCoeff());
            worst = std::max(worst, (mean_jacobian_fd(ch, y) - shrink).cwiseAbs().maxCoeff());
        }
        rows.push_back({"gaussian_grid_shrinkage", 2, worst, 1e-4});
    }
    {  // information-density Hessian via the score route
        VectorChannel ch(rand_atoms(2, 4), rand_spd(2));
        double worst = 0;
        for (int t = 0; t < 6; ++t) {
            VectorXd y = rand_vec(2, 1.8);
            MatrixXd hlog(2, 2);
            double step = 1e-4 * (1.0 + y.cwiseAbs().maxCoeff());
            for (int j = 0; j < 2; ++j) {
                VectorXd e = VectorXd::Zero(2);
                e[j] = 1.0;
                auto d = [&](double hh) {
                    return ((vector_score(ch, y + hh * e) - vector_score(ch, y - hh * e)) /
                            (2 * hh))
                        .eval();
                };
                hlog.col(j) = (4.0 * d(step / 2) - d(step)) / 3.0;
            }
            MatrixXd expected = -ch.noise_cov_inv() - hlog;
            worst = std::max(
                worst, (info_density_hessian(ch, y) - expected).cwiseAbs().maxCoeff());
        }
        rows.push_back({"info_density_hessian", 2, worst, 1e-6});
    }
    report_battery(rows, true, out, "vector-check");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"conditional-mean estimator identities: CSV reproduction tool"};
    app.require_subcommand(1);

    ChannelArgs ca;
    std::string grid_s;  // per-subcommand default applied at dispatch
    std::string k_s = "1..4";
    std::string out;
    std::string est_s = "matched";
    std::vector<double> steps;
    std::vector<double> levels;
    std::vector<int> ns;
    int order_m = 1, order_c = 2, n_seeds = 20, points = 201;
    double u = 0.1, w = 0.05;
    std::uint64_t seed = 1;
    std::string check_what = "identities";
    bool check_all = false;

    auto* moments = app.add_subcommand("moments", "posterior moments along a y grid");
    auto* cumulants = app.add_subcommand("cumulants", "posterior cumulants along a y grid");
    auto* inverse = app.add_subcommand("inverse", "marginal density rebuilt from the mean");
    auto* pdf_ce = app.add_subcommand("pdf-ce", "law of the estimate E[X|Y]");
    auto* pdf_error = app.add_subcommand("pdf-error", "density of the error X - g(Y)");
    auto* mmse = app.add_subcommand("mmse", "minimum error and its lower bound");
    auto* eb_m = app.add_subcommand("eb-moments", "sample-based moment consistency sweep");
    auto* eb_c = app.add_subcommand("eb-cumulants", "sample-based cumulant consistency sweep");
    auto* lanczos = app.add_subcommand("lanczos-demo", "mollified-derivative mean approximation");
    auto* vcheck = app.add_subcommand("vector-check", "multivariate identity battery");
    auto* check = app.add_subcommand("check", "scalar identity battery");

    for (auto* sub : {moments, cumulants, inverse, pdf_ce, pdf_error, eb_m, eb_c, lanczos})
        add_channel_args(sub, ca);
    mmse->add_option("--prior", ca.prior_path, "prior description file");
    for (auto* sub : {moments, cumulants, inverse, lanczos})
        sub->add_option("--grid", grid_s, "y grid as lo:hi:count (default -5:5:201)");
    pdf_error->add_option("--grid", grid_s, "w grid as lo:hi:count (default -3:3:201)");
    moments->add_option("--k", k_s, "orders: K, A..B, or A,B,C");
    cumulants->add_option("--k", k_s, "orders: K, A..B, or A,B,C");
    pdf_ce->add_option("--grid", grid_s, "explicit x grid lo:hi:count (default: natural range)");
    pdf_ce->add_option("--points", points, "grid size across the natural range")
        ->check(CLI::Range(2, 1000000));
    pdf_error->add_option("--estimator", est_s, "matched | prior:PATH | linear:SLOPE");
    mmse->add_option("--sigma2", levels, "noise levels to sweep (repeatable)");
    mmse->add_option("--grid", grid_s, "sigma2 sweep as lo:hi:count");
    lanczos->set_help_flag("--help", "print help");  // frees -h for the step option
    lanczos->add_option("--h", steps, "window half-widths (repeatable, default 0.1 and 0.5)");
    for (auto* sub : {eb_m, eb_c}) {
        sub->add_option("--k", sub == eb_c ? order_c : order_m, "target order");
        sub->add_option("--n", ns, "sample sizes (repeatable)");
        sub->add_option("--seeds", n_seeds, "independent replicates per sample size")
            ->check(CLI::Range(1, 10000));
        sub->add_option("--u", u, "bandwidth exponent: a = n^-u");
        sub->add_option("--w", w, "window exponent: t = sigma2 sqrt(w log n)/3");
        sub->add_option("--seed", seed, "base seed for the replicate streams");
    }
    vcheck->add_option("--seed", seed, "seed for the battery points");
    vcheck->add_option("--out", out, "optional CSV path for the residual table");
    check->add_option("what", check_what, "battery name (identities)");
    check->add_flag("--all", check_all, "run every check (default)");
    check->add_option("--out", out, "optional CSV path for the residual table");
    for (auto* sub : {moments, cumulants, inverse, pdf_ce, pdf_error, mmse, eb_m, eb_c, lanczos})
        sub->add_option("--out", out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    auto pick_out = [&](const char* fallback) { return out.empty() ? fallback : out.c_str(); };
    auto grid_or = [&](const char* fallback) { return grid_s.empty() ? fallback : grid_s.c_str(); };
    try {
        if (*moments) run_moments(ca, grid_or("-5:5:201"), k_s, pick_out("moments.csv"));
        if (*cumulants) run_cumulants(ca, grid_or("-5:5:201"), k_s, pick_out("cumulants.csv"));
        if (*inverse) run_inverse(ca, grid_or("-5:5:201"), pick_out("inverse.csv"));
        if (*pdf_ce) run_pdf_ce(ca, grid_s, points, pick_out("pdf_ce.csv"));
        if (*pdf_error) run_pdf_error(ca, grid_or("-3:3:201"), est_s, pick_out("pdf_error.csv"));
        if (*mmse) run_mmse(ca, levels, grid_s, pick_out("mmse.csv"));
        if (*eb_m) run_eb(ca, false, order_m, ns, n_seeds, u, w, seed, pick_out("eb_moments.csv"));
        if (*eb_c) run_eb(ca, true, order_c, ns, n_seeds, u, w, seed, pick_out("eb_cumulants.csv"));
        if (*lanczos) run_lanczos_demo(ca, grid_or("-5:5:201"), steps, pick_out("lanczos_demo.csv"));
        if (*vcheck) return run_vector_check(seed, out);
        if (*check) {
            if (check_what != "identities")
                throw std::invalid_argument("check: unknown battery '" + check_what + "'");
            return run_check(out);
        }
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
