#include <cme/multivar.hpp>

#include <cme/polybasis.hpp>
#include <cme/quadrature.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace cme {
namespace {

const VectorAtoms* as_atoms(const VectorPrior& p) { return std::get_if<VectorAtoms>(&p); }
const SphereUniform* as_sphere(const VectorPrior& p) { return std::get_if<SphereUniform>(&p); }

void require_dim(const VectorChannel& ch, const Eigen::VectorXd& y) {
    if (y.size() != ch.dim()) throw std::invalid_argument("observation dimension mismatch");
}

const VectorAtoms& require_atoms(const VectorChannel& ch) {
    if (const auto* a = as_atoms(ch.prior())) return *a;
    throw std::domain_error("operation requires a finitely supported prior");
}

// I_{n/2} / I_{n/2 - 1} ratio driving every radial sphere formula.
double sphere_ratio(int n, double t) { return poly::bessel_ratio(0.5 * n, t); }

// Richardson-extrapolated central difference of a vector-valued map.
template <class F>
Eigen::MatrixXd jacobian_richardson(F&& f, const Eigen::VectorXd& y, int rows, double h0) {
    const int n = static_cast<int>(y.size());
    double h = h0 * (1.0 + y.cwiseAbs().maxCoeff());
    Eigen::MatrixXd jac(rows, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[j] = 1.0;
        auto central = [&](double hh) {
            return ((f(y + hh * e) - f(y - hh * e)) / (2.0 * hh)).eval();
        };
        jac.col(j) = (4.0 * central(h / 2) - central(h)) / 3.0;
    }
    return jac;
}

}  // namespace

VectorChannel::VectorChannel(VectorPrior prior, Eigen::MatrixXd noise_cov)
    : prior_(std::move(prior)), k_(std::move(noise_cov)) {
    if (k_.rows() < 1 || k_.rows() != k_.cols())
        throw std::invalid_argument("noise covariance must be square and non-empty");
    dim_ = static_cast<int>(k_.rows());
    double scale = k_.cwiseAbs().maxCoeff();
    if (!(scale > 0) || !std::isfinite(scale))
        throw std::invalid_argument("noise covariance must be finite and nonzero");
    if ((k_ - k_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("noise covariance must be symmetric");
    llt_.compute(k_);
    if (llt_.info() != Eigen::Success)
        throw std::invalid_argument("noise covariance must be positive definite");
    k_inv_ = llt_.solve(Eigen::MatrixXd::Identity(dim_, dim_));
    double logdet = 0;
    for (int i = 0; i < dim_; ++i) logdet += 2.0 * std::log(llt_.matrixL()(i, i));
    log_norm_ = -0.5 * (dim_ * std::log(2.0 * std::numbers::pi) + logdet);
    isotropic_ =
        (k_ - k_(0, 0) * Eigen::MatrixXd::Identity(dim_, dim_)).cwiseAbs().maxCoeff() <=
        1e-12 * scale;

    if (const auto* a = as_atoms(prior_)) {
        if (a->points.rows() != dim_)
            throw std::invalid_argument("atom dimension does not match the noise covariance");
        if (a->points.cols() < 1 || a->probs.size() != a->points.cols())
            throw std::invalid_argument("atom points and masses must align");
        double mass = 0;
        for (int j = 0; j < a->probs.size(); ++j) {
            if (!(a->probs[j] >= 0) || !std::isfinite(a->probs[j]))
                throw std::invalid_argument("atom masses must be nonnegative");
            if (!a->points.col(j).allFinite())
                throw std::invalid_argument("atom points must be finite");
            mass += a->probs[j];
        }
        if (std::abs(mass - 1.0) > 1e-9)
            throw std::invalid_argument("atom masses must sum to one");
    } else {
        const auto& s = std::get<SphereUniform>(prior_);
        if (s.dim != dim_)
            throw std::invalid_argument("sphere dimension does not match the noise covariance");
        if (!(s.radius > 0) || !std::isfinite(s.radius))
            throw std::invalid_argument("sphere radius must be positive");
        if (!isotropic_)
            throw std::invalid_argument("sphere prior requires isotropic noise");
    }
}

double VectorChannel::sigma2() const {
    if (!isotropic_) throw std::domain_error("noise covariance is not a scalar multiple of I");
    return k_(0, 0);
}

Eigen::VectorXd VectorChannel::posterior_weights(const Eigen::VectorXd& y) const {
    require_dim(*this, y);
    const auto& a = require_atoms(*this);
    const int m = static_cast<int>(a.probs.size());
    Eigen::VectorXd logw(m);
    for (int j = 0; j < m; ++j) {
        if (a.probs[j] == 0) {
            logw[j] = -std::numeric_limits<double>::infinity();
            continue;
        }
        Eigen::VectorXd d = y - a.points.col(j);
        logw[j] = std::log(a.probs[j]) - 0.5 * d.dot(llt_.solve(d));
    }
    double top = logw.maxCoeff();
    Eigen::VectorXd w = (logw.array() - top).exp();
    return w / w.sum();
}

double VectorChannel::log_marginal_density(const Eigen::VectorXd& y) const {
    require_dim(*this, y);
    if (const auto* s = as_sphere(prior_)) return sphere_log_marginal(*s, sigma2(), y);
    const auto& a = *as_atoms(prior_);
    double top = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd logs(a.probs.size());
    for (int j = 0; j < a.probs.size(); ++j) {
        if (a.probs[j] == 0) {
            logs[j] = -std::numeric_limits<double>::infinity();
            continue;
        }
        Eigen::VectorXd d = y - a.points.col(j);
        logs[j] = std::log(a.probs[j]) + log_norm_ - 0.5 * d.dot(llt_.solve(d));
        top = std::max(top, logs[j]);
    }
    double acc = 0;
    for (int j = 0; j < logs.size(); ++j) acc += std::exp(logs[j] - top);
    return top + std::log(acc);
}

Eigen::VectorXd vector_tre_mean(const VectorChannel& ch, const Eigen::VectorXd& y) {
    require_dim(ch, y);
    if (const auto* s = as_sphere(ch.prior())) return sphere_mean_closed_form(*s, ch.sigma2(), y);
    const auto& a = *as_atoms(ch.prior());
    return a.points * ch.posterior_weights(y);
}

Eigen::VectorXd vector_score(const VectorChannel& ch, const Eigen::VectorXd& y) {
    return ch.noise_cov_inv() * (vector_tre_mean(ch, y) - y);
}

Eigen::MatrixXd posterior_variance(const VectorChannel& ch, const Eigen::VectorXd& y) {
    require_dim(ch, y);
    if (const auto* s = as_sphere(ch.prior())) return sphere_second_cumulant(*s, ch.sigma2(), y);
    const auto& a = *as_atoms(ch.prior());
    Eigen::VectorXd w = ch.posterior_weights(y);
    Eigen::VectorXd m = a.points * w;
    Eigen::MatrixXd second = a.points * w.asDiagonal() * a.points.transpose();
    return second - m * m.transpose();
}

double vector_info_density(const VectorChannel& ch, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y) {
    require_dim(ch, y);
    if (x.size() != ch.dim()) throw std::invalid_argument("signal dimension mismatch");
    Eigen::VectorXd d = y - x;
    double logcond = ch.log_noise_normalizer() - 0.5 * d.dot(ch.noise_cov_inv() * d);
    return logcond - ch.log_marginal_density(y);
}

Eigen::MatrixXd info_density_hessian(const VectorChannel& ch, const Eigen::VectorXd& y) {
    const auto& kinv = ch.noise_cov_inv();
    return -kinv * posterior_variance(ch, y) * kinv;
}

double posterior_u_moment(const VectorChannel& ch, const UDescriptor& u,
                          const Eigen::VectorXd& y) {
    require_dim(ch, y);
    const auto& a = require_atoms(ch);
    if (static_cast<int>(u.exponents.size()) != ch.dim())
        throw std::invalid_argument("observable exponents must match the channel dimension");
    for (int e : u.exponents)
        if (e < 0) throw std::invalid_argument("observable exponents must be nonnegative");
    Eigen::VectorXd w = ch.posterior_weights(y);
    double acc = 0;
    for (int j = 0; j < w.size(); ++j) {
        double val = 1.0;
        for (int i = 0; i < ch.dim(); ++i) val *= std::pow(a.points(i, j), u.exponents[i]);
        acc += w[j] * val;
    }
    return acc;
}

double jacobian_identity_residual(const VectorChannel& ch, const UDescriptor& u,
                                  const Eigen::VectorXd& y, double h0) {
    require_dim(ch, y);
    const auto& a = require_atoms(ch);
    auto scalar = [&](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, posterior_u_moment(ch, u, z)).eval();
    };
    Eigen::VectorXd grad = jacobian_richardson(scalar, y, 1, h0).row(0).transpose();

    // Exact side: K^{-1} Cov(X, U | Y=y) from posterior sums.
    Eigen::VectorXd w = ch.posterior_weights(y);
    Eigen::VectorXd m = a.points * w;
    double eu = 0;
    Eigen::VectorXd exu = Eigen::VectorXd::Zero(ch.dim());
    for (int j = 0; j < w.size(); ++j) {
        double val = 1.0;
        for (int i = 0; i < ch.dim(); ++i) val *= std::pow(a.points(i, j), u.exponents[i]);
        eu += w[j] * val;
        exu += w[j] * val * a.points.col(j);
    }
    Eigen::VectorXd cov = exu - eu * m;
    return (grad - ch.noise_cov_inv() * cov).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd mean_jacobian_fd(const VectorChannel& ch, const Eigen::VectorXd& y, double h0) {
    require_dim(ch, y);
    return jacobian_richardson([&](const Eigen::VectorXd& z) { return vector_tre_mean(ch, z); },
                               y, ch.dim(), h0);
}

double matrix_jaffer_residual(const VectorChannel& ch, const Eigen::VectorXd& y, double h0) {
    const auto& a = require_atoms(ch);
    Eigen::VectorXd w = ch.posterior_weights(y);
    Eigen::VectorXd m = a.points * w;
    Eigen::MatrixXd second = a.points * w.asDiagonal() * a.points.transpose();
    Eigen::MatrixXd ladder =
        mean_jacobian_fd(ch, y, h0) * ch.noise_cov() + m * m.transpose();
    return (ladder - second).cwiseAbs().maxCoeff();
}

TraceCheck jacobian_trace_bounds(const VectorChannel& ch, const Eigen::VectorXd& y,
                                 double support_radius) {
    if (!(support_radius >= 0)) throw std::invalid_argument("support radius must be nonnegative");
    TraceCheck tc;
    tc.trace = (posterior_variance(ch, y) * ch.noise_cov_inv()).trace();
    tc.upper = support_radius * support_radius * ch.noise_cov_inv().trace();
    double tol = 1e-10 * (1.0 + tc.upper);
    tc.ok = tc.trace >= -tol && tc.trace <= tc.upper + tol;
    return tc;
}

Eigen::VectorXd sphere_mean_closed_form(const SphereUniform& s, double sigma2,
                                        const Eigen::VectorXd& y) {
    if (!(sigma2 > 0)) throw std::invalid_argument("noise level must be positive");
    if (y.size() != s.dim) throw std::invalid_argument("observation dimension mismatch");
    double rho = y.norm();
    if (rho == 0) return Eigen::VectorXd::Zero(s.dim);
    double t = s.radius * rho / sigma2;
    return (s.radius * sphere_ratio(s.dim, t) / rho) * y;
}

double sphere_log_marginal(const SphereUniform& s, double sigma2, const Eigen::VectorXd& y) {
    if (!(sigma2 > 0)) throw std::invalid_argument("noise level must be positive");
    if (y.size() != s.dim) throw std::invalid_argument("observation dimension mismatch");
    double rho = y.norm();
    double gauss = -0.5 * s.dim * std::log(2.0 * std::numbers::pi * sigma2) -
                   (rho * rho + s.radius * s.radius) / (2.0 * sigma2);
    double t = s.radius * rho / sigma2;
    if (s.dim == 1)  // two symmetric atoms: cosh tilt, overflow-safe
        return gauss + t - std::numbers::ln2 + std::log1p(std::exp(-2.0 * t));
    // Polar average of the tilt over the sphere, peak factored out for large t:
    // log E[e^{t cos}] = t + log E[e^{t(cos - 1)}] with the sin^{n-2} weight.
    int p = s.dim - 2;
    auto tilt = [&](double th) {
        return std::exp(t * (std::cos(th) - 1.0)) * std::pow(std::sin(th), p);
    };
    auto weight = [&](double th) { return std::pow(std::sin(th), p); };
    double num = quad::integrate_gl(tilt, 0.0, std::numbers::pi, 128);
    double den = quad::integrate_gl(weight, 0.0, std::numbers::pi, 128);
    return gauss + t + std::log(num / den);
}

Eigen::MatrixXd sphere_second_cumulant(const SphereUniform& s, double sigma2,
                                       const Eigen::VectorXd& y) {
    if (!(sigma2 > 0)) throw std::invalid_argument("noise level must be positive");
    if (y.size() != s.dim) throw std::invalid_argument("observation dimension mismatch");
    const int n = s.dim;
    const double r2 = s.radius * s.radius;
    double rho = y.norm();
    if (rho == 0)  // uniform second moment R^2/n per coordinate, mean zero
        return (r2 / n) * Eigen::MatrixXd::Identity(n, n);
    double t = s.radius * rho / sigma2;
    double ratio = sphere_ratio(n, t);
    double dratio = poly::bessel_ratio_derivative(0.5 * n, t);
    // Var = sigma2 d/dy [R u(y) ratio(R|y|/sigma2)] splits into a tangential
    // ratio/rho part and a radial ratio' part.
    double tang = sigma2 * s.radius * ratio / rho;
    double radial = r2 * dratio;
    Eigen::MatrixXd uu = (y / rho) * (y / rho).transpose();
    return tang * (Eigen::MatrixXd::Identity(n, n) - uu) + radial * uu;
}

}  // namespace cme
