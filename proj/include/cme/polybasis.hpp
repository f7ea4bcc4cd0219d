#pragma once

#include <span>
#include <vector>

namespace cme::poly {

// Coefficient table for partial exponential Bell polynomials B_{n,k} up to a
// fixed maximum order, built once from the recurrence
//   B_{n,k} = sum_{j=1}^{n-k+1} C(n-1, j-1) x_j B_{n-j,k-1}.
// Coefficients are exact integers well below 2^53 for max_n <= 12.
class PartialBellTable {
public:
    explicit PartialBellTable(int max_n);

    int max_order() const { return max_n_; }

    // B_{n,k}(x_1, ..., x_{n-k+1}).  args may be longer; extras are ignored.
    double partial(int n, int k, std::span<const double> args) const;

    // Complete polynomial B_n(x_1, ..., x_n) = sum_{k=1}^n B_{n,k}; B_0 = 1.
    double complete(int n, std::span<const double> args) const;

    // Shared table with max_order() == 12.
    static const PartialBellTable& standard();

private:
    struct Monomial {
        std::vector<int> exp;  // exp[j] = multiplicity of x_{j+1}
        double coeff;
    };
    int max_n_;
    std::vector<std::vector<std::vector<Monomial>>> terms_;  // [n][k]
};

// Convenience wrappers over PartialBellTable::standard().
double bell_partial(int n, int k, std::span<const double> args);
double bell_complete(int n, std::span<const double> args);

// G_m(t): the all-plus companion of the probabilists' Hermite polynomial
// (equal to (-i)^m He_m(i t)); G_{m+1} = t G_m + m G_{m-1}, G_0 = 1, G_1 = t.
double hermite_g(int m, double t);

// Probabilists' Hermite He_m: He_{m+1} = x He_m - m He_{m-1}.
double hermite_he(int m, double x);

// Legendre polynomial P_n(t) on [-1, 1].
double legendre_p(int n, double t);

// Exact binomial coefficient / factorial as doubles (n small).
double binomial(int n, int k);
double factorial(int n);

// Cumulants kappa_1..kappa_K from raw moments mu_1..mu_K:
//   kappa_k = sum_{m=1}^{k} (-1)^{m-1} (m-1)! B_{k,m}(mu_1, ..., mu_{k-m+1}).
std::vector<double> moments_to_cumulants(std::span<const double> mu);

// Raw moments from cumulants: mu_k = B_k(kappa_1, ..., kappa_k).
std::vector<double> cumulants_to_moments(std::span<const double> kappa);

// r(nu, t) = I_nu(t) / I_{nu-1}(t), t > 0, nu >= 1/2.  Continued fraction
// with 1e-14 convergence threshold; series fallback below t = 1e-3.
double bessel_ratio(double nu, double t);

// dr/dt = 1 - ((2 nu - 1)/t) r - r^2.
double bessel_ratio_derivative(double nu, double t);

} // namespace cme::poly
