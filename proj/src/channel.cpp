#include <cme/channel.hpp>

#include <cme/errors.hpp>
#include <cme/polybasis.hpp>
#include <cme/quadrature.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace cme {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_phi(double u, double var) {
    return -0.5 * u * u / var - 0.5 * std::log(2 * std::numbers::pi * var);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": not finite");
}

} // namespace

void validate(const Prior& p) {
    std::visit(
        [](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, DiscreteAtoms>) {
                if (q.points.empty()) throw std::invalid_argument("atoms prior: no points");
                if (q.points.size() != q.probs.size())
                    throw std::invalid_argument("atoms prior: points/probs size mismatch");
                double s = 0.0;
                for (double x : q.points) require_finite(x, "atom point");
                for (double w : q.probs) {
                    require_finite(w, "atom prob");
                    if (w < 0) throw std::invalid_argument("atoms prior: negative probability");
                    s += w;
                }
                if (std::abs(s - 1.0) > 1e-12)
                    throw std::invalid_argument("atoms prior: probabilities sum to " +
                                                std::to_string(s) + ", expected 1");
            } else if constexpr (std::is_same_v<T, GaussianPrior>) {
                require_finite(q.mean, "gaussian mean");
                require_finite(q.variance, "gaussian variance");
                if (!(q.variance > 0)) throw std::invalid_argument("gaussian prior: variance <= 0");
            } else if constexpr (std::is_same_v<T, TwoPointPrior>) {
                require_finite(q.p, "two-point p");
                if (!(q.p > 0 && q.p < 1))
                    throw std::invalid_argument("two-point prior: p outside (0,1)");
            } else {
                require_finite(q.radius, "sphere radius");
                if (!(q.radius > 0)) throw std::invalid_argument("sphere prior: radius <= 0");
                if (q.dim < 1) throw std::invalid_argument("sphere prior: dim < 1");
            }
        },
        p);
}

double prior_moment(const Prior& p, int k) {
    if (k < 0) throw std::invalid_argument("prior_moment: negative order");
    return std::visit(
        [k](const auto& q) -> double {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, DiscreteAtoms>) {
                double s = 0.0;
                for (size_t i = 0; i < q.points.size(); ++i)
                    s += q.probs[i] * std::pow(q.points[i], k);
                return s;
            } else if constexpr (std::is_same_v<T, GaussianPrior>) {
                // m_k = mu m_{k-1} + (k-1) v m_{k-2}
                double m2 = 0.0, m1 = 1.0;
                for (int j = 1; j <= k; ++j) {
                    double m = q.mean * m1 + (j - 1) * q.variance * m2;
                    m2 = m1;
                    m1 = m;
                }
                return m1;
            } else if constexpr (std::is_same_v<T, TwoPointPrior>) {
                return q.p + (1 - q.p) * (k % 2 ? -1.0 : 1.0);
            } else {
                if (q.dim != 1)
                    throw capability_error("prior_moment: sphere prior with dim > 1 is vector-valued");
                return k % 2 ? 0.0 : std::pow(q.radius, k);
            }
        },
        p);
}

double prior_abs_moment(const Prior& p, int k) {
    if (k < 0) throw std::invalid_argument("prior_abs_moment: negative order");
    return std::visit(
        [k](const auto& q) -> double {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, DiscreteAtoms>) {
                double s = 0.0;
                for (size_t i = 0; i < q.points.size(); ++i)
                    s += q.probs[i] * std::pow(std::abs(q.points[i]), k);
                return s;
            } else if constexpr (std::is_same_v<T, GaussianPrior>) {
                double sd = std::sqrt(q.variance);
                double lo = q.mean - 12 * sd, hi = q.mean + 12 * sd;
                auto f = [&](double x) {
                    return std::pow(std::abs(x), k) *
                           std::exp(log_phi(x - q.mean, q.variance));
                };
                double s = 0.0;
                if (lo < 0) s += quad::integrate_adaptive(f, lo, std::min(0.0, hi), 1e-12);
                if (hi > 0) s += quad::integrate_adaptive(f, std::max(0.0, lo), hi, 1e-12);
                return s;
            } else if constexpr (std::is_same_v<T, TwoPointPrior>) {
                return 1.0;
            } else {
                return std::pow(q.radius, k);
            }
        },
        p);
}

double prior_variance(const Prior& p) {
    if (const auto* s = std::get_if<SphereUniform>(&p)) {
        if (s->dim != 1) return s->radius * s->radius / s->dim;  // per-coordinate variance
        return s->radius * s->radius;
    }
    double m1 = prior_moment(p, 1);
    return prior_moment(p, 2) - m1 * m1;
}

std::optional<double> prior_support_radius(const Prior& p) {
    return std::visit(
        [](const auto& q) -> std::optional<double> {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, DiscreteAtoms>) {
                double r = 0.0;
                for (double x : q.points) r = std::max(r, std::abs(x));
                return r;
            } else if constexpr (std::is_same_v<T, GaussianPrior>) {
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, TwoPointPrior>) {
                return 1.0;
            } else {
                return q.radius;
            }
        },
        p);
}

Prior scalarize(const Prior& p) {
    if (const auto* s = std::get_if<SphereUniform>(&p)) {
        if (s->dim == 1)
            return DiscreteAtoms{{-s->radius, s->radius}, {0.5, 0.5}};
    }
    return p;
}

// ---------------------------------------------------------------------------
// Prior spec files

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& tok) {
    size_t pos = 0;
    double v;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("prior spec: bad number '" + tok + "'");
    }
    if (pos != tok.size()) throw std::invalid_argument("prior spec: bad number '" + tok + "'");
    return v;
}

std::vector<double> parse_list(std::string v) {
    for (char& c : v)
        if (c == '[' || c == ']' || c == ',') c = ' ';
    std::istringstream in(v);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_number(tok));
    return out;
}

} // namespace

PriorSpec parse_prior_spec(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("prior spec: expected 'key = value' in '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("prior spec: empty key or value in '" + line + "'");
        if (!kv.emplace(key, val).second)
            throw std::invalid_argument("prior spec: duplicate key '" + key + "'");
    }

    static const std::vector<std::string> known{"kind", "points", "probs",  "mean", "variance",
                                               "p",    "radius", "dim",    "sigma2"};
    for (const auto& [k, v] : kv)
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw std::invalid_argument("prior spec: unknown key '" + k + "'");

    auto it = kv.find("kind");
    if (it == kv.end()) throw std::invalid_argument("prior spec: missing 'kind'");
    std::string kind = it->second;
    std::transform(kind.begin(), kind.end(), kind.begin(),
                   [](unsigned char c) { return std::tolower(c); });

    auto has = [&](const char* k) { return kv.count(k) != 0; };
    auto allow_only = [&](std::initializer_list<const char*> keys) {
        for (const auto& [k, v] : kv) {
            if (k == "kind" || k == "sigma2") continue;
            bool ok = false;
            for (const char* a : keys)
                if (k == a) ok = true;
            if (!ok)
                throw std::invalid_argument("prior spec: key '" + k + "' does not apply to kind '" +
                                            kind + "'");
        }
    };
    auto get = [&](const char* k) -> const std::string& {
        auto jt = kv.find(k);
        if (jt == kv.end())
            throw std::invalid_argument(std::string("prior spec: missing '") + k + "'");
        return jt->second;
    };

    PriorSpec out;
    if (kind == "atoms") {
        allow_only({"points", "probs"});
        DiscreteAtoms a;
        a.points = parse_list(get("points"));
        if (has("probs"))
            a.probs = parse_list(get("probs"));
        else
            a.probs.assign(a.points.size(), a.points.empty() ? 0.0 : 1.0 / a.points.size());
        out.prior = std::move(a);
    } else if (kind == "gaussian") {
        allow_only({"mean", "variance"});
        out.prior = GaussianPrior{parse_number(get("mean")), parse_number(get("variance"))};
    } else if (kind == "two_point") {
        allow_only({"p"});
        out.prior = TwoPointPrior{parse_number(get("p"))};
    } else if (kind == "sphere") {
        allow_only({"radius", "dim"});
        double d = parse_number(get("dim"));
        if (d != std::floor(d)) throw std::invalid_argument("prior spec: dim must be an integer");
        out.prior = SphereUniform{parse_number(get("radius")), static_cast<int>(d)};
    } else {
        throw std::invalid_argument("prior spec: unknown kind '" + kind + "'");
    }
    validate(out.prior);

    if (has("sigma2")) {
        double s2 = parse_number(get("sigma2"));
        if (!(s2 > 0) || !std::isfinite(s2))
            throw std::invalid_argument("prior spec: sigma2 must be positive");
        out.sigma2 = s2;
    }
    return out;
}

PriorSpec load_prior_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open prior spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_prior_spec(buf.str());
}

// ---------------------------------------------------------------------------
// IntervalUnion

IntervalUnion IntervalUnion::le(double t) { return {{{-kInf, t}}}; }
IntervalUnion IntervalUnion::ge(double t) { return {{{t, kInf}}}; }
IntervalUnion IntervalUnion::between(double a, double b) { return {{{a, b}}}; }
IntervalUnion IntervalUnion::outside(double t) { return {{{-kInf, -t}, {t, kInf}}}; }

bool IntervalUnion::contains(double x) const {
    for (const auto& [a, b] : parts)
        if (x >= a && x <= b) return true;
    return false;
}

// ---------------------------------------------------------------------------
// ScalarChannel

ScalarChannel::ScalarChannel(Prior prior, double sigma2)
    : prior_(std::move(prior)), sigma2_(sigma2) {
    validate(prior_);
    if (!(sigma2 > 0) || !std::isfinite(sigma2))
        throw std::invalid_argument("ScalarChannel: sigma2 must be positive and finite");
    if (std::holds_alternative<SphereUniform>(prior_))
        throw capability_error(
            "ScalarChannel: sphere prior is vector-valued (scalarize() a dim-1 sphere first)");

    if (const auto* a = std::get_if<DiscreteAtoms>(&prior_)) {
        for (size_t i = 0; i < a->points.size(); ++i)
            if (a->probs[i] > 0)
                comps_.push_back({a->points[i], std::log(a->probs[i]), sigma2_});
    } else if (const auto* g = std::get_if<GaussianPrior>(&prior_)) {
        comps_.push_back({g->mean, 0.0, g->variance + sigma2_});
    } else {
        const auto& t = std::get<TwoPointPrior>(prior_);
        comps_.push_back({1.0, std::log(t.p), sigma2_});
        comps_.push_back({-1.0, std::log(1 - t.p), sigma2_});
    }
}

double ScalarChannel::sigma() const { return std::sqrt(sigma2_); }

double ScalarChannel::y_stddev() const { return std::sqrt(prior_variance(prior_) + sigma2_); }

double ScalarChannel::marginal_density(double y, int k) const {
    if (k < 0) throw std::invalid_argument("marginal_density: negative derivative order");
    double s = 0.0;
    for (const auto& c : comps_) {
        double sd = std::sqrt(c.var), u = (y - c.loc) / sd;
        double deriv = poly::hermite_he(k, u) * std::pow(-1.0 / sd, k);
        s += std::exp(c.logp + log_phi(y - c.loc, c.var)) * deriv;
    }
    return s;
}

double ScalarChannel::log_marginal_density(double y) const {
    double m = -kInf;
    std::vector<double> z(comps_.size());
    for (size_t i = 0; i < comps_.size(); ++i) {
        z[i] = comps_[i].logp + log_phi(y - comps_[i].loc, comps_[i].var);
        m = std::max(m, z[i]);
    }
    double s = 0.0;
    for (double zi : z) s += std::exp(zi - m);
    return m + std::log(s);
}

double ScalarChannel::marginal_cdf(double y) const {
    double s = 0.0;
    for (const auto& c : comps_)
        s += std::exp(c.logp) * std_normal_cdf((y - c.loc) / std::sqrt(c.var));
    return s;
}

std::vector<double> ScalarChannel::density_ratio_derivatives(double y, int k) const {
    if (k < 0) throw std::invalid_argument("density_ratio_derivatives: negative order");
    size_t n = comps_.size();
    std::vector<double> z(n), u(n);
    double m = -kInf;
    for (size_t i = 0; i < n; ++i) {
        z[i] = comps_[i].logp + log_phi(y - comps_[i].loc, comps_[i].var);
        u[i] = (y - comps_[i].loc) / std::sqrt(comps_[i].var);
        m = std::max(m, z[i]);
    }
    double tot = 0.0;
    for (size_t i = 0; i < n; ++i) {
        z[i] = std::exp(z[i] - m);
        tot += z[i];
    }
    std::vector<double> r(k + 1, 0.0);
    r[0] = 1.0;
    // He recurrence per mixture component, scaled by (-1/sd)^j.
    std::vector<double> prev(n, 1.0), cur(n);
    for (size_t i = 0; i < n; ++i) cur[i] = u[i];
    for (int j = 1; j <= k; ++j) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double sd = std::sqrt(comps_[i].var);
            s += (z[i] / tot) * cur[i] * std::pow(-1.0 / sd, j);
            double next = u[i] * cur[i] - j * prev[i];
            prev[i] = cur[i];
            cur[i] = next;
        }
        r[j] = s;
    }
    return r;
}

std::vector<double> ScalarChannel::log_density_derivatives(double y, int k) const {
    if (k < 1) throw std::invalid_argument("log_density_derivatives: order must be >= 1");
    if (k > poly::PartialBellTable::standard().max_order())
        throw std::invalid_argument("log_density_derivatives: order above table capacity");
    auto r = density_ratio_derivatives(y, k);
    // The ratio sequence acts as formal moments; its log transform yields the
    // log-density derivatives.
    return poly::moments_to_cumulants(std::span<const double>(r).subspan(1));
}

// ---------------------------------------------------------------------------
// PosteriorOracle

namespace {

struct Atom {
    double x, logp;
};

std::vector<Atom> atom_view(const Prior& p) {
    std::vector<Atom> out;
    if (const auto* a = std::get_if<DiscreteAtoms>(&p)) {
        for (size_t i = 0; i < a->points.size(); ++i)
            if (a->probs[i] > 0) out.push_back({a->points[i], std::log(a->probs[i])});
    } else if (const auto* t = std::get_if<TwoPointPrior>(&p)) {
        out.push_back({1.0, std::log(t->p)});
        out.push_back({-1.0, std::log(1 - t->p)});
    }
    return out;
}

// Posterior weights for a discrete prior at observation y.
std::vector<double> posterior_weights(const std::vector<Atom>& atoms, double y, double sigma2) {
    std::vector<double> z(atoms.size());
    double m = -kInf;
    for (size_t i = 0; i < atoms.size(); ++i) {
        double u = y - atoms[i].x;
        z[i] = atoms[i].logp - 0.5 * u * u / sigma2;
        m = std::max(m, z[i]);
    }
    double tot = 0.0;
    for (auto& zi : z) {
        zi = std::exp(zi - m);
        tot += zi;
    }
    for (auto& zi : z) zi /= tot;
    return z;
}


// Normalized integration kernel p(x) phi_sigma2(y - x) for a gaussian prior,
// with the window carrying all posterior mass.
struct GaussianKernel {
    double prior_mean, prior_var, noise_var, y, mean, lo, hi, shift;

    GaussianKernel(const GaussianPrior& g, double sigma2, double yy)
        : prior_mean(g.mean), prior_var(g.variance), noise_var(sigma2), y(yy) {
        double post_var = prior_var * noise_var / (prior_var + noise_var);
        mean = (prior_mean * noise_var + y * prior_var) / (prior_var + noise_var);
        double sd = std::sqrt(post_var);
        lo = mean - 12 * sd;
        hi = mean + 12 * sd;
        shift = log_phi(mean - prior_mean, prior_var) + log_phi(y - mean, noise_var);
    }

    double operator()(double x) const {
        return std::exp(log_phi(x - prior_mean, prior_var) + log_phi(y - x, noise_var) - shift);
    }
};

} // namespace

PosteriorOracle::PosteriorOracle(const ScalarChannel& ch, QuadratureSpec spec)
    : ch_(&ch), spec_(spec) {}

double PosteriorOracle::moment(int k, double y) const {
    if (k < 0) throw std::invalid_argument("posterior moment: negative order");
    const Prior& p = ch_->prior();
    if (const auto* g = std::get_if<GaussianPrior>(&p)) {
        GaussianKernel ker(*g, ch_->sigma2(), y);
        double den = quad::integrate_adaptive(ker, ker.lo, ker.hi, spec_.abs_tol, spec_.max_depth);
        double num = quad::integrate_adaptive(
            [&](double x) { return std::pow(x, k) * ker(x); }, ker.lo, ker.hi, spec_.abs_tol,
            spec_.max_depth);
        return num / den;
    }
    auto atoms = atom_view(p);
    auto w = posterior_weights(atoms, y, ch_->sigma2());
    double s = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) s += w[i] * std::pow(atoms[i].x, k);
    return s;
}

double PosteriorOracle::variance(double y) const {
    double m = moment(1, y);
    return moment(2, y) - m * m;
}

double PosteriorOracle::abs_moment(int k, double y) const {
    const Prior& p = ch_->prior();
    if (const auto* g = std::get_if<GaussianPrior>(&p)) {
        GaussianKernel ker(*g, ch_->sigma2(), y);
        double den = quad::integrate_adaptive(ker, ker.lo, ker.hi, spec_.abs_tol, spec_.max_depth);
        auto f = [&](double x) { return std::pow(std::abs(x), k) * ker(x); };
        double num = 0.0;
        if (ker.lo < 0)
            num += quad::integrate_adaptive(f, ker.lo, std::min(0.0, ker.hi), spec_.abs_tol,
                                            spec_.max_depth);
        if (ker.hi > 0)
            num += quad::integrate_adaptive(f, std::max(0.0, ker.lo), ker.hi, spec_.abs_tol,
                                            spec_.max_depth);
        return num / den;
    }
    auto atoms = atom_view(p);
    auto w = posterior_weights(atoms, y, ch_->sigma2());
    double s = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) s += w[i] * std::pow(std::abs(atoms[i].x), k);
    return s;
}

double PosteriorOracle::set_probability(const IntervalUnion& A, double y) const {
    const Prior& p = ch_->prior();
    if (const auto* g = std::get_if<GaussianPrior>(&p)) {
        GaussianKernel ker(*g, ch_->sigma2(), y);
        double den = quad::integrate_adaptive(ker, ker.lo, ker.hi, spec_.abs_tol, spec_.max_depth);
        double num = 0.0;
        for (auto [a, b] : A.parts) {
            double aa = std::max(a, ker.lo), bb = std::min(b, ker.hi);
            if (aa < bb)
                num += quad::integrate_adaptive(ker, aa, bb, spec_.abs_tol, spec_.max_depth);
        }
        return num / den;
    }
    auto atoms = atom_view(p);
    auto w = posterior_weights(atoms, y, ch_->sigma2());
    double s = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i)
        if (A.contains(atoms[i].x)) s += w[i];
    return s;
}

double PosteriorOracle::set_moment(const IntervalUnion& A, int k, double y) const {
    const Prior& p = ch_->prior();
    if (const auto* g = std::get_if<GaussianPrior>(&p)) {
        GaussianKernel ker(*g, ch_->sigma2(), y);
        double num = 0.0, den = 0.0;
        for (auto [a, b] : A.parts) {
            double aa = std::max(a, ker.lo), bb = std::min(b, ker.hi);
            if (aa < bb) {
                den += quad::integrate_adaptive(ker, aa, bb, spec_.abs_tol, spec_.max_depth);
                num += quad::integrate_adaptive(
                    [&](double x) { return std::pow(x, k) * ker(x); }, aa, bb, spec_.abs_tol,
                    spec_.max_depth);
            }
        }
        if (!(den > 0))
            throw std::domain_error("set_moment: conditioning event has vanishing probability");
        return num / den;
    }
    auto atoms = atom_view(p);
    auto w = posterior_weights(atoms, y, ch_->sigma2());
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (A.contains(atoms[i].x)) {
            den += w[i];
            num += w[i] * std::pow(atoms[i].x, k);
        }
    }
    if (!(den > 0))
        throw std::domain_error("set_moment: conditioning event has vanishing probability");
    return num / den;
}

} // namespace cme
