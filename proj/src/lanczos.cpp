#include <cme/lanczos.hpp>

#include <cme/polybasis.hpp>
#include <cme/quadrature.hpp>

#include <cmath>
#include <stdexcept>

namespace cme {

double lanczos_c(int n) {
    if (n < 1) throw std::invalid_argument("lanczos_c: order must be >= 1");
    double p = 1;
    for (int j = 3; j <= 2 * n + 1; j += 2) p *= j;
    return p / 2;
}

double lanczos_alpha(int n) {
    return lanczos_c(n) / poly::factorial(n + 2) * 2.0 / std::sqrt(2.0 * n + 1);
}

double lanczos_beta(int n) { return 2.0 * lanczos_c(n) / std::sqrt(2.0 * n + 1); }

double choose_step(int n, double noise_level) {
    if (n < 1) throw std::invalid_argument("choose_step: order must be >= 1");
    if (!(noise_level > 0)) throw std::invalid_argument("choose_step: noise level must be positive");
    return std::pow(noise_level, 1.0 / (n + 2));
}

double lanczos_derivative(const std::function<double(double)>& f, const LanczosOperator& op,
                          double x) {
    if (op.order < 1) throw std::invalid_argument("lanczos_derivative: order must be >= 1");
    if (!(op.step > 0)) throw std::invalid_argument("lanczos_derivative: step must be positive");
    if (op.nodes < op.order + 2)
        throw std::invalid_argument("lanczos_derivative: too few quadrature nodes");
    const auto& rule = quad::gauss_legendre(op.nodes);
    double acc = 0;
    for (size_t i = 0; i < rule.x.size(); ++i)
        acc += rule.w[i] * f(x + op.step * rule.x[i]) * poly::legendre_p(op.order, rule.x[i]);
    return lanczos_c(op.order) * acc / std::pow(op.step, op.order);
}

}  // namespace cme
