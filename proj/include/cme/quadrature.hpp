#pragma once

#include <functional>
#include <vector>

namespace cme::quad {

struct Rule {
    std::vector<double> x, w;
};

// n-node Gauss-Legendre rule on [-1, 1] (Golub-Welsch nodes, Newton-polished).
// Cached per order; thread-safe.
const Rule& gauss_legendre(int n);

// n-node Gauss-Hermite rule for weight e^{-t^2} on the real line.
const Rule& gauss_hermite(int n);

// integral of f over [a, b] by the n-node Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n = 64);

// E[g(Z)] for Z ~ N(mean, var) by the n-node Hermite rule.
double gauss_expect(const std::function<double(double)>& g, double mean, double var, int n = 64);

// Adaptive Gauss-Kronrod integral of f over [a, b]; throws cme::numeric_error
// if the error estimate cannot be brought below abs_tol.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol = 1e-10, int max_depth = 15);

} // namespace cme::quad
