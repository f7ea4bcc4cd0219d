#pragma once

#include <cme/channel.hpp>

#include <Eigen/Dense>

#include <variant>
#include <vector>

namespace cme {

// Finitely supported vector prior: column j of `points` is an atom with mass
// probs[j].
struct VectorAtoms {
    Eigen::MatrixXd points;  // dim x m
    Eigen::VectorXd probs;   // m
};
using VectorPrior = std::variant<VectorAtoms, SphereUniform>;

// Y = X + N with N ~ N(0, K) in R^n.  Atom priors admit any SPD noise
// covariance; the uniform-sphere prior requires isotropic noise K = sigma2 I.
class VectorChannel {
public:
    VectorChannel(VectorPrior prior, Eigen::MatrixXd noise_cov);

    int dim() const { return dim_; }
    const VectorPrior& prior() const { return prior_; }
    const Eigen::MatrixXd& noise_cov() const { return k_; }
    const Eigen::MatrixXd& noise_cov_inv() const { return k_inv_; }
    bool isotropic() const { return isotropic_; }
    double sigma2() const;  // isotropic channels only

    double log_marginal_density(const Eigen::VectorXd& y) const;
    // Posterior atom masses (atom priors only).
    Eigen::VectorXd posterior_weights(const Eigen::VectorXd& y) const;
    // log of the N(0, K) density normalizer -(n/2) log 2pi - (1/2) log det K.
    double log_noise_normalizer() const { return log_norm_; }

private:
    VectorPrior prior_;
    Eigen::MatrixXd k_, k_inv_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double log_norm_ = 0;  // -(n/2) log 2pi - (1/2) log det K
    int dim_ = 0;
    bool isotropic_ = false;
};

// E[X | Y=y] = y + K grad log f_Y(y); atom priors by posterior averaging,
// the sphere prior in closed form through the radial Bessel ratio.
Eigen::VectorXd vector_tre_mean(const VectorChannel& ch, const Eigen::VectorXd& y);

// grad log f_Y(y), recovered from the mean shift K^{-1}(E[X|Y=y] - y).
Eigen::VectorXd vector_score(const VectorChannel& ch, const Eigen::VectorXd& y);

// Var(X | Y=y): exact posterior sums for atoms, closed form on the sphere.
Eigen::MatrixXd posterior_variance(const VectorChannel& ch, const Eigen::VectorXd& y);

// Information density log( phi_K(y - x) / f_Y(y) ) and its y-Hessian
// -K^{-1} Var(X|Y=y) K^{-1}.
double vector_info_density(const VectorChannel& ch, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y);
Eigen::MatrixXd info_density_hessian(const VectorChannel& ch, const Eigen::VectorXd& y);

// Scalar observable U(x) = prod_i x_i^{exponents[i]}.
struct UDescriptor {
    std::vector<int> exponents;
};
double posterior_u_moment(const VectorChannel& ch, const UDescriptor& u,
                          const Eigen::VectorXd& y);

// Gradient identity grad_y E[U|Y=y] = K^{-1} Cov(X, U | Y=y): sup-norm gap
// between a Richardson-extrapolated finite-difference gradient and the exact
// covariance side.
double jacobian_identity_residual(const VectorChannel& ch, const UDescriptor& u,
                                  const Eigen::VectorXd& y, double h0 = 1e-4);

// Finite-difference Jacobian of the posterior mean (Richardson-extrapolated).
Eigen::MatrixXd mean_jacobian_fd(const VectorChannel& ch, const Eigen::VectorXd& y,
                                 double h0 = 1e-4);

// Second-moment ladder E[X X^T | Y=y] = J_m(y) K + m m^T: sup-norm residual
// against exact posterior sums, with J_m taken by finite differences.
double matrix_jaffer_residual(const VectorChannel& ch, const Eigen::VectorXd& y,
                              double h0 = 1e-4);

// 0 <= Tr(J_m) <= R^2 Tr(K^{-1}) for priors in a ball of radius R, via the
// exact Var(X|Y=y) K^{-1} form of the Jacobian.
struct TraceCheck {
    double trace = 0;
    double upper = 0;
    bool ok = false;
};
TraceCheck jacobian_trace_bounds(const VectorChannel& ch, const Eigen::VectorXd& y,
                                 double support_radius);

// Uniform-on-the-sphere ingredients (isotropic noise): closed-form posterior
// mean, marginal log-density via the polar integral, and Var(X|Y=y).
Eigen::VectorXd sphere_mean_closed_form(const SphereUniform& s, double sigma2,
                                        const Eigen::VectorXd& y);
double sphere_log_marginal(const SphereUniform& s, double sigma2, const Eigen::VectorXd& y);
Eigen::MatrixXd sphere_second_cumulant(const SphereUniform& s, double sigma2,
                                       const Eigen::VectorXd& y);

}  // namespace cme
