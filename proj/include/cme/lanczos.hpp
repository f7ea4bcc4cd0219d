#pragma once

#include <functional>

namespace cme {

// Mollified differentiation: instead of dividing differences, integrate the
// sample against a Legendre polynomial over a window of half-width `step`,
//   D_h^(n) f(x) = (c_n / h^n) * int_{-1}^{1} f(x + h t) P_n(t) dt,
// which reproduces n-th derivatives of polynomials exactly and trades an
// O(h^2) bias for strong noise suppression.
struct LanczosOperator {
    int order = 1;    // derivative order n >= 1
    double step = 0.1;  // window half-width h > 0
    int nodes = 64;   // quadrature nodes for the window integral
};

double lanczos_derivative(const std::function<double(double)>& f, const LanczosOperator& op,
                          double x);

// Normalization c_n = (2n+1)!!/2.
double lanczos_c(int n);

// Error budget |D_h f - f^(n)(x)| <= alpha_n * sup|f^(n+2)| * h^2
//                                    + beta_n * (value noise) / h^n.
double lanczos_alpha(int n);
double lanczos_beta(int n);

// Step that balances the two budget terms for unit curvature:
// (noise)^{1/(n+2)}.
double choose_step(int n, double noise_level);

}  // namespace cme
