#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cme/channel.hpp>
#include <cme/identities.hpp>
#include <cme/series.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace cme;

TEST_CASE("mean expansion at the origin for the symmetric binary prior") {
    ScalarChannel two(TwoPointPrior{0.5}, 1.0);
    auto s = ce_series(two, 0.0, 5);
    REQUIRE(s.coeffs.size() == 6);
    // tanh: t - t^3/3 + 2 t^5/15.
    std::vector<double> want{0.0, 1.0, 0.0, -1.0 / 3, 0.0, 2.0 / 15};
    for (int k = 0; k <= 5; ++k)
        CHECK(s.coeffs[k] == doctest::Approx(want[k]).epsilon(1e-10).scale(1.0));
    CHECK(s.center == 0.0);
    CHECK(s.radius == doctest::Approx(0.18393972058572117).epsilon(1e-14));

    for (double y : {-0.15, 0.05, 0.15})
        CHECK(s.eval(y) == doctest::Approx(std::tanh(y)).epsilon(1e-7).scale(1.0));
    auto s11 = ce_series(two, 0.0, 11);
    for (double y : {-0.15, 0.15})
        CHECK(s11.eval(y) == doctest::Approx(std::tanh(y)).epsilon(1e-12).scale(1.0));
}

TEST_CASE("mean expansion is affine for a gaussian prior") {
    ScalarChannel g(GaussianPrior{0.0, 1.0}, 1.0);
    auto s = ce_series(g, 0.6, 4);
    CHECK(s.coeffs[0] == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(s.coeffs[1] == doctest::Approx(0.5).epsilon(1e-13));
    for (int k = 2; k <= 4; ++k)
        CHECK(s.coeffs[k] == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(std::isinf(s.radius));
}

TEST_CASE("series inversion: frozen oracles") {
    // tanh -> atanh.
    PowerSeries t{0.0, {0.0, 1.0, 0.0, -1.0 / 3, 0.0, 2.0 / 15}, 0.0};
    auto inv = lagrange_invert(t);
    std::vector<double> want{0.0, 1.0, 0.0, 1.0 / 3, 0.0, 1.0 / 5};
    REQUIRE(inv.coeffs.size() == 6);
    for (int k = 0; k <= 5; ++k)
        CHECK(inv.coeffs[k] == doctest::Approx(want[k]).epsilon(1e-12).scale(1.0));
    CHECK(inv.center == 0.0);

    // exp - 1 -> log(1 + x).
    PowerSeries e{0.0, {0.0, 1.0, 0.5, 1.0 / 6, 1.0 / 24, 1.0 / 120}, 0.0};
    auto li = lagrange_invert(e);
    std::vector<double> lw{0.0, 1.0, -0.5, 1.0 / 3, -0.25, 1.0 / 5};
    for (int k = 0; k <= 5; ++k)
        CHECK(li.coeffs[k] == doctest::Approx(lw[k]).epsilon(1e-12).scale(1.0));

    // Affine input inverts in closed form, including centers.
    PowerSeries a{2.0, {5.0, 4.0}, 0.0};
    auto ai = lagrange_invert(a);
    CHECK(ai.center == doctest::Approx(5.0));
    CHECK(ai.coeffs[0] == doctest::Approx(2.0));
    CHECK(ai.coeffs[1] == doctest::Approx(0.25));

    CHECK_THROWS_AS(lagrange_invert(PowerSeries{0.0, {1.0}, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(lagrange_invert(PowerSeries{0.0, {1.0, 0.0, 2.0}, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("inverse series round trip for a biased binary prior") {
    ScalarChannel ch(TwoPointPrior{0.3}, 1.0);
    auto inv = ce_inverse_series(ch, 0.0, 11);
    CHECK(inv.radius > 0.02);

    double delta = 0.5 * std::log(0.3 / 0.7);
    CHECK(inv.center == doctest::Approx(std::tanh(delta)).epsilon(1e-12));
    for (double frac : {-1.0, -0.5, -0.25, 0.25, 0.5, 1.0}) {
        double x = inv.center + frac * inv.radius;
        double y = inv.eval(x);
        // Closed-form inverse of tanh(y + delta).
        CHECK(y == doctest::Approx(std::atanh(x) - delta).epsilon(1e-6).scale(1.0));
        CHECK(tre_mean(ch, y) == doctest::Approx(x).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("estimator range endpoints") {
    ScalarChannel two(TwoPointPrior{0.5}, 1.0);
    auto [lo, hi] = estimator_range(two);
    CHECK(lo > -1.0);
    CHECK(lo < -0.999);
    CHECK(hi < 1.0);
    CHECK(hi > 0.999);

    ScalarChannel g(GaussianPrior{0.0, 1.0}, 1.0);
    auto [glo, ghi] = estimator_range(g);
    double want = 10 * std::sqrt(2.0) / 2;  // mean slope 1/2 at ten output sigmas
    CHECK(ghi == doctest::Approx(want).epsilon(1e-12));
    CHECK(glo == doctest::Approx(-want).epsilon(1e-12));
}

TEST_CASE("inverse evaluation against closed forms") {
    ScalarChannel two(TwoPointPrior{0.5}, 1.0);
    for (double x : {-0.999, -0.6, -0.1, 0.0, 0.35, 0.9, 0.999}) {
        double y = ce_inverse_eval(two, x);
        CHECK(y == doctest::Approx(std::atanh(x)).epsilon(1e-9).scale(1.0));
        CHECK(tre_mean(two, y) == doctest::Approx(x).epsilon(1e-11).scale(1.0));
    }

    ScalarChannel bi(TwoPointPrior{0.3}, 1.0);
    double delta = 0.5 * std::log(0.3 / 0.7);
    for (double x : {-0.95, -0.4, 0.2, 0.8})
        CHECK(ce_inverse_eval(bi, x) == doctest::Approx(std::atanh(x) - delta).epsilon(1e-9));

    ScalarChannel g(GaussianPrior{0.0, 1.0}, 0.5);
    for (double x : {-2.0, 0.0, 1.3})
        CHECK(ce_inverse_eval(g, x) == doctest::Approx(1.5 * x).epsilon(1e-10).scale(1.0));

    CHECK_THROWS_AS(ce_inverse_eval(two, 1.5), std::domain_error);
    CHECK_THROWS_AS(ce_inverse_eval(two, -1.0), std::domain_error);
}

TEST_CASE("expansion order validation") {
    ScalarChannel two(TwoPointPrior{0.5}, 1.0);
    CHECK_THROWS_AS(ce_series(two, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(ce_series(two, 0.0, 12), std::invalid_argument);
}
