#include <cme/polybasis.hpp>

#include <cme/errors.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace cme::poly {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return std::round(r);
}

double factorial(int n) {
    if (n < 0) throw std::domain_error("factorial: negative argument");
    double r = 1.0;
    for (int j = 2; j <= n; ++j) r *= j;
    return r;
}

PartialBellTable::PartialBellTable(int max_n) : max_n_(max_n) {
    if (max_n < 0) throw std::invalid_argument("PartialBellTable: max_n < 0");
    terms_.assign(max_n + 1, {});
    for (int n = 0; n <= max_n; ++n) terms_[n].assign(n + 1, {});
    terms_[0][0].push_back({{}, 1.0});
    for (int n = 1; n <= max_n; ++n) {
        for (int k = 1; k <= n; ++k) {
            // Merge monomials produced by x_j * B_{n-j,k-1}.
            std::map<std::vector<int>, double> acc;
            for (int j = 1; j <= n - k + 1; ++j) {
                double c = binomial(n - 1, j - 1);
                for (const auto& mono : terms_[n - j][k - 1]) {
                    std::vector<int> e = mono.exp;
                    if (static_cast<int>(e.size()) < j) e.resize(j, 0);
                    ++e[j - 1];
                    acc[e] += c * mono.coeff;
                }
            }
            auto& out = terms_[n][k];
            out.reserve(acc.size());
            for (auto& [e, c] : acc) out.push_back({e, c});
        }
    }
}

double PartialBellTable::partial(int n, int k, std::span<const double> args) const {
    if (n < 0 || n > max_n_)
        throw std::out_of_range("bell_partial: order " + std::to_string(n) +
                                " outside table (max " + std::to_string(max_n_) + ")");
    if (k < 0 || k > n) return 0.0;
    if (n == 0) return 1.0;
    if (k == 0) return 0.0;
    if (static_cast<int>(args.size()) < n - k + 1)
        throw std::invalid_argument("bell_partial: need " + std::to_string(n - k + 1) +
                                    " arguments, got " + std::to_string(args.size()));
    double s = 0.0;
    for (const auto& mono : terms_[n][k]) {
        double p = mono.coeff;
        for (size_t j = 0; j < mono.exp.size(); ++j)
            for (int rep = 0; rep < mono.exp[j]; ++rep) p *= args[j];
        s += p;
    }
    return s;
}

double PartialBellTable::complete(int n, std::span<const double> args) const {
    if (n < 0 || n > max_n_)
        throw std::out_of_range("bell_complete: order outside table");
    if (n == 0) return 1.0;
    if (static_cast<int>(args.size()) < n)
        throw std::invalid_argument("bell_complete: need n arguments");
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += partial(n, k, args);
    return s;
}

const PartialBellTable& PartialBellTable::standard() {
    static const PartialBellTable tbl(12);
    return tbl;
}

double bell_partial(int n, int k, std::span<const double> args) {
    return PartialBellTable::standard().partial(n, k, args);
}

double bell_complete(int n, std::span<const double> args) {
    return PartialBellTable::standard().complete(n, args);
}

double hermite_g(int m, double t) {
    if (m < 0) throw std::invalid_argument("hermite_g: negative order");
    double prev = 1.0, cur = t;
    if (m == 0) return prev;
    for (int j = 1; j < m; ++j) {
        double next = t * cur + j * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double hermite_he(int m, double x) {
    if (m < 0) throw std::invalid_argument("hermite_he: negative order");
    double prev = 1.0, cur = x;
    if (m == 0) return prev;
    for (int j = 1; j < m; ++j) {
        double next = x * cur - j * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double legendre_p(int n, double t) {
    if (n < 0) throw std::invalid_argument("legendre_p: negative order");
    double prev = 1.0, cur = t;
    if (n == 0) return prev;
    for (int k = 1; k < n; ++k) {
        double next = ((2 * k + 1) * t * cur - k * prev) / (k + 1);
        prev = cur;
        cur = next;
    }
    return cur;
}

std::vector<double> moments_to_cumulants(std::span<const double> mu) {
    const auto& tbl = PartialBellTable::standard();
    int K = static_cast<int>(mu.size());
    if (K > tbl.max_order())
        throw std::invalid_argument("moments_to_cumulants: order above table capacity");
    std::vector<double> kappa(K);
    for (int k = 1; k <= K; ++k) {
        double s = 0.0, sign = 1.0, fact = 1.0;  // (-1)^{m-1} (m-1)!
        for (int m = 1; m <= k; ++m) {
            s += sign * fact * tbl.partial(k, m, mu);
            sign = -sign;
            fact *= m;
        }
        kappa[k - 1] = s;
    }
    return kappa;
}

std::vector<double> cumulants_to_moments(std::span<const double> kappa) {
    const auto& tbl = PartialBellTable::standard();
    int K = static_cast<int>(kappa.size());
    if (K > tbl.max_order())
        throw std::invalid_argument("cumulants_to_moments: order above table capacity");
    std::vector<double> mu(K);
    for (int k = 1; k <= K; ++k) mu[k - 1] = tbl.complete(k, kappa);
    return mu;
}

double bessel_ratio(double nu, double t) {
    if (!(t > 0.0)) throw std::domain_error("bessel_ratio: requires t > 0");
    if (!(nu >= 0.5)) throw std::domain_error("bessel_ratio: requires nu >= 1/2");

    if (t < 1e-3) {
        // I_nu(t) = (t/2)^nu / Gamma(nu+1) * S(nu),
        // S(nu) = 1 + q/(nu+1) + q^2/(2(nu+1)(nu+2)) + ...,  q = t^2/4.
        double q = 0.25 * t * t;
        auto S = [q](double v) {
            return 1.0 + q / (v + 1) + q * q / (2 * (v + 1) * (v + 2));
        };
        return t / (2 * nu) * S(nu) / S(nu - 1);
    }

    // r = 1/(b1 + 1/(b2 + 1/(b3 + ...))), b_j = 2(nu+j-1)/t; modified Lentz.
    const double tiny = 1e-300;
    double f = tiny, C = f, D = 0.0;
    const int max_iter = 100000;
    for (int j = 1; j <= max_iter; ++j) {
        double b = 2.0 * (nu + j - 1) / t;
        D = b + D;
        if (D == 0.0) D = tiny;
        C = b + 1.0 / C;
        if (C == 0.0) C = tiny;
        D = 1.0 / D;
        double delta = C * D;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-14) return f;
    }
    throw numeric_error("bessel_ratio: continued fraction did not converge");
}

double bessel_ratio_derivative(double nu, double t) {
    double r = bessel_ratio(nu, t);
    return 1.0 - (2.0 * nu - 1.0) / t * r - r * r;
}

} // namespace cme::poly
