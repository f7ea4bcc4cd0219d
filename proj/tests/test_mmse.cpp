#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cme/channel.hpp>
#include <cme/identities.hpp>
#include <cme/mmse.hpp>
#include <cme/quadrature.hpp>

#include <cmath>
#include <random>

using namespace cme;

TEST_CASE("gaussian prior: closed forms at unit noise") {
    ScalarChannel ch(GaussianPrior{0.0, 1.0}, 1.0);
    CHECK(mmse_exact(ch) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(poincare_lower_bound(ch) == doctest::Approx(0.375).epsilon(1e-8));
    auto rep = mmse_report(ch);
    CHECK(rep.sigma2 == 1.0);
    CHECK(rep.mmse == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(rep.gradient_rep == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(rep.hessian_rep == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(rep.poincare_lower == doctest::Approx(0.375).epsilon(1e-8));
}

TEST_CASE("gaussian prior: closed forms across noise levels") {
    for (double s2 : {0.1, 0.5, 2.0}) {
        ScalarChannel ch(GaussianPrior{0.0, 1.0}, s2);
        CHECK(mmse_exact(ch) == doctest::Approx(s2 / (1 + s2)).epsilon(1e-9));
        double want = s2 * (s2 + 0.5) / ((1 + s2) * (1 + s2));
        CHECK(poincare_lower_bound(ch) == doctest::Approx(want).epsilon(1e-7));
    }
    // General prior variance.
    double v = 1.5, s2 = 0.8;
    ScalarChannel ch(GaussianPrior{0.0, v}, s2);
    CHECK(mmse_exact(ch) == doctest::Approx(s2 * v / (s2 + v)).epsilon(1e-9));
    double want = s2 * v * (0.5 * v + s2) / ((v + s2) * (v + s2));
    CHECK(poincare_lower_bound(ch) == doctest::Approx(want).epsilon(1e-7));
}

TEST_CASE("two-point prior: monte carlo cross check") {
    ScalarChannel ch(TwoPointPrior{0.5}, 1.0);
    double got = mmse_exact(ch);

    std::mt19937_64 rng(271828);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const int n = 1'000'000;
    double acc = 0, acc2 = 0;
    for (int i = 0; i < n; ++i) {
        double x = coin(rng) ? 1.0 : -1.0;
        double y = x + noise(rng);
        double e = x - tre_mean(ch, y);
        acc += e * e;
        acc2 += e * e * e * e;
    }
    double mc = acc / n;
    double se = std::sqrt((acc2 / n - mc * mc) / n);
    CHECK(std::abs(got - mc) <= 3 * se + 1e-12);
}

TEST_CASE("integral representations agree with the direct value") {
    ScalarChannel two(TwoPointPrior{0.3}, 1.0);
    auto r1 = mmse_report(two);
    CHECK(r1.gradient_rep == doctest::Approx(r1.mmse).epsilon(1e-6));
    CHECK(r1.hessian_rep == doctest::Approx(r1.mmse).epsilon(1e-8));

    ScalarChannel at(DiscreteAtoms{{-2, 0, 2}, {0.25, 0.5, 0.25}}, 0.7);
    auto r2 = mmse_report(at);
    CHECK(r2.gradient_rep == doctest::Approx(r2.mmse).epsilon(1e-6));
    CHECK(r2.hessian_rep == doctest::Approx(r2.mmse).epsilon(1e-8));

    ScalarChannel g(GaussianPrior{0.4, 1.2}, 1.5);
    auto r3 = mmse_report(g);
    CHECK(r3.gradient_rep == doctest::Approx(r3.mmse).epsilon(1e-6));
    CHECK(r3.hessian_rep == doctest::Approx(r3.mmse).epsilon(1e-8));
}

TEST_CASE("orthogonality: prior second moment splits into mmse plus estimate energy") {
    ScalarChannel ch(TwoPointPrior{0.5}, 1.0);
    double energy = quad::integrate_adaptive(
        [&](double y) {
            double m = tre_mean(ch, y);
            return m * m * ch.marginal_density(y);
        },
        -13, 13, 1e-10);
    CHECK(mmse_exact(ch) + energy == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("lower bound never exceeds the mmse") {
    for (double s2 : {0.1, 0.5, 1.0, 5.0, 100.0}) {
        for (int which : {0, 1, 2}) {
            Prior p = which == 0   ? Prior{TwoPointPrior{0.5}}
                      : which == 1 ? Prior{GaussianPrior{0.0, 1.0}}
                                   : Prior{DiscreteAtoms{{-2, 0, 2}, {0.25, 0.5, 0.25}}};
            ScalarChannel ch(p, s2);
            double lo = poincare_lower_bound(ch);
            double m = mmse_exact(ch);
            CHECK(lo <= m * (1 + 1e-9) + 1e-12);
            CHECK(lo >= 0.0);
        }
    }
}
