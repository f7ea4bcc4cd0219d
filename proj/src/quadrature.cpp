#include <cme/quadrature.hpp>

#include <cme/errors.hpp>
#include <cme/polybasis.hpp>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace cme::quad {

namespace {

// Eigenvalues of the symmetric tridiagonal Jacobi matrix with zero diagonal
// and the given off-diagonal entries.
std::vector<double> jacobi_nodes(const std::vector<double>& beta) {
    int n = static_cast<int>(beta.size()) + 1;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n - 1; ++k) J(k, k + 1) = J(k + 1, k) = beta[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    std::vector<double> x(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return x;
}

void symmetrize(Rule& r) {
    int n = static_cast<int>(r.x.size());
    for (int i = 0; i < n / 2; ++i) {
        double xm = 0.5 * (r.x[i] - r.x[n - 1 - i]);
        r.x[i] = xm;
        r.x[n - 1 - i] = -xm;
        double wm = 0.5 * (r.w[i] + r.w[n - 1 - i]);
        r.w[i] = r.w[n - 1 - i] = wm;
    }
    if (n % 2) r.x[n / 2] = 0.0;
}

Rule make_legendre(int n) {
    std::vector<double> beta(n - 1);
    for (int k = 1; k < n; ++k) beta[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    Rule r;
    r.x = jacobi_nodes(beta);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = r.x[i];
        for (int it = 0; it < 3; ++it) {  // Newton polish on P_n
            double p = poly::legendre_p(n, x);
            double pm = poly::legendre_p(n - 1, x);
            double dp = n * (x * p - pm) / (x * x - 1.0);
            x -= p / dp;
        }
        r.x[i] = x;
        double pm = poly::legendre_p(n - 1, x);
        double dp = n * (x * poly::legendre_p(n, x) - pm) / (x * x - 1.0);
        r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    symmetrize(r);
    return r;
}

Rule make_hermite(int n) {
    std::vector<double> beta(n - 1);
    for (int k = 1; k < n; ++k) beta[k - 1] = std::sqrt(0.5 * k);
    Rule r;
    r.x = jacobi_nodes(beta);
    r.w.resize(n);
    // Orthonormal recurrence wrt e^{-x^2}: h_{k+1} = (x sqrt2 h_k - sqrt k h_{k-1})/sqrt(k+1).
    auto ortho = [n](double x, std::vector<double>& h) {
        h.resize(n + 1);
        h[0] = std::pow(std::numbers::pi, -0.25);
        if (n >= 1) h[1] = std::numbers::sqrt2 * x * h[0];
        for (int k = 1; k < n; ++k)
            h[k + 1] = (std::numbers::sqrt2 * x * h[k] - std::sqrt(double(k)) * h[k - 1]) /
                       std::sqrt(double(k + 1));
    };
    std::vector<double> h;
    for (int i = 0; i < n; ++i) {
        double x = r.x[i];
        for (int it = 0; it < 3; ++it) {
            ortho(x, h);
            double dp = std::sqrt(2.0 * n) * h[n - 1];
            x -= h[n] / dp;
        }
        r.x[i] = x;
        ortho(x, h);
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += h[k] * h[k];
        r.w[i] = 1.0 / s;  // Christoffel weight; sums to sqrt(pi)
    }
    symmetrize(r);
    return r;
}

const Rule& cached(int n, std::map<int, Rule>& store, std::mutex& m, Rule (*make)(int)) {
    if (n < 1) throw std::invalid_argument("quadrature rule: order must be >= 1");
    std::lock_guard<std::mutex> lock(m);
    auto it = store.find(n);
    if (it == store.end()) it = store.emplace(n, make(n)).first;
    return it->second;
}

} // namespace

const Rule& gauss_legendre(int n) {
    static std::map<int, Rule> store;
    static std::mutex m;
    return cached(n, store, m, make_legendre);
}

const Rule& gauss_hermite(int n) {
    static std::map<int, Rule> store;
    static std::mutex m;
    return cached(n, store, m, make_hermite);
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int n) {
    const Rule& r = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(mid + half * r.x[i]);
    return s * half;
}

double gauss_expect(const std::function<double(double)>& g, double mean, double var, int n) {
    if (!(var >= 0)) throw std::domain_error("gauss_expect: negative variance");
    if (var == 0) return g(mean);
    const Rule& r = gauss_hermite(n);
    double scale = std::sqrt(2.0 * var);
    double s = 0.0;
    for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * g(mean + scale * r.x[i]);
    return s / std::sqrt(std::numbers::pi);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth) {
    double err = 0.0, l1 = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, a, b, static_cast<unsigned>(max_depth), 1e-13, &err, &l1);
    if (!(err <= abs_tol) && !(err <= 1e-13 * l1))
        throw numeric_error("integrate_adaptive: error estimate " + std::to_string(err) +
                            " above tolerance " + std::to_string(abs_tol));
    return v;
}

} // namespace cme::quad
