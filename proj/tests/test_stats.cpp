#include <cmath>

#include <doctest.h>

#include "smallnoise/errors.hpp"
#include "smallnoise/rng.hpp"
#include "smallnoise/stats.hpp"

using namespace smallnoise;

TEST_CASE("fit_loglog recovers an exact power law") {
    std::vector<double> x{0.4, 0.2, 0.1, 0.05};
    std::vector<double> y;
    for (double v : x) y.push_back(3.5 * std::pow(v, 2.25));
    const auto fit = fit_loglog(x, y);
    CHECK(fit.slope == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(std::exp(fit.intercept) == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(fit.slope_stderr == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("fit_line rejects degenerate inputs") {
    std::vector<double> x{1.0, 1.0, 1.0};
    std::vector<double> y{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(fit_line(x, y), DomainError);
    const std::vector<double> negative{-1.0, 1.0};
    const std::vector<double> ones{1.0, 1.0};
    CHECK_THROWS_AS(fit_loglog(negative, ones), DomainError);
}

TEST_CASE("normal_cdf reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-10));
    CHECK(normal_cdf(1.0, 1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("kolmogorov tail endpoints") {
    CHECK(kolmogorov_tail(0.0) == 1.0);
    CHECK(kolmogorov_tail(5.0) < 1e-10);
    // classical value Q(1) ~ 0.27
    CHECK(kolmogorov_tail(1.0) == doctest::Approx(0.26999967).epsilon(1e-5));
}

TEST_CASE("KS accepts a true normal sample and rejects a shifted one") {
    Rng rng(2027);
    std::vector<double> sample(2000);
    for (auto& v : sample) v = 1.5 * rng.next_normal();
    const auto good = ks_test_normal(sample, 0.0, 1.5);
    CHECK(good.p_value > 0.01);
    const auto bad = ks_test_normal(sample, 1.0, 1.5);
    CHECK(bad.p_value < 1e-6);
}

TEST_CASE("mean and variance basics") {
    std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    CHECK(mean(xs) == 2.5);
    CHECK(variance(xs) == doctest::Approx(5.0 / 3.0));
    CHECK_THROWS_AS(mean(std::vector<double>{}), DomainError);
}

TEST_CASE("rng moments are sane") {
    Rng rng(7);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.next_normal();
        sum += z;
        sum_sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("replicate seeds are distinct and order-free") {
    CHECK(replicate_seed(1, 0) != replicate_seed(1, 1));
    CHECK(replicate_seed(1, 0) != replicate_seed(2, 0));
    CHECK(replicate_seed(123, 55) == replicate_seed(123, 55));
}
