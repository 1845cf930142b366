#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "smallnoise/errors.hpp"
#include "smallnoise/kernels.hpp"

using namespace smallnoise;

TEST_CASE("rectangular kernel has unit mass and zero first moment") {
    const Kernel g = make_kernel("rectangular");
    CHECK(g.support_a == -0.5);
    CHECK(g.support_b == 0.5);
    CHECK(kernel_moment(g, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(kernel_moment(g, 1)) < 1e-12);
}

TEST_CASE("epanechnikov moments match closed forms and the oracle") {
    const Kernel g = make_kernel("epanechnikov");
    // int u^2 G = 1/5 and int G^2 = 3/5
    CHECK(kernel_moment(g, 2) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(kernel_moment(g, 0, false, true) == doctest::Approx(0.6).epsilon(1e-12));
    const double oracle_m2 = oracles::integrate(
        [&](double u) { return u * u * 0.75 * (1.0 - u * u); }, -1.0, 1.0);
    CHECK(kernel_moment(g, 2) == doctest::Approx(oracle_m2).epsilon(1e-12));
    const double oracle_g2 = oracles::integrate(
        [&](double u) { return 0.5625 * (1.0 - u * u) * (1.0 - u * u); }, -1.0, 1.0);
    CHECK(kernel_moment(g, 0, false, true) == doctest::Approx(oracle_g2).epsilon(1e-12));
}

TEST_CASE("odd moments of symmetric kernels vanish") {
    for (const char* family : {"rectangular", "triangular", "epanechnikov"}) {
        const Kernel g = make_kernel(family);
        for (int j : {1, 3, 5}) CHECK(std::abs(kernel_moment(g, j)) < 1e-12);
    }
}

TEST_CASE("tilted kernel is strictly order zero") {
    const Kernel g = make_kernel("tilted");
    CHECK(g.order == 0);
    CHECK(kernel_moment(g, 0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(kernel_moment(g, 1) == doctest::Approx(0.5).epsilon(1e-12));
    // second moment removed by construction so the leading bias term is clean
    CHECK(std::abs(kernel_moment(g, 2)) < 1e-12);
    const double oracle = oracles::integrate(
        [&](double u) { return u * (1.125 + 0.75 * u - 1.875 * u * u); }, -1.0, 1.0);
    CHECK(kernel_moment(g, 1) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("order-2 polynomial kernel solves the moment system") {
    const Kernel g = make_kernel("polynomial_order_k", 2);
    CHECK(kernel_moment(g, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(kernel_moment(g, 1)) < 1e-10);
    CHECK(std::abs(kernel_moment(g, 2)) < 1e-10);
    CHECK(std::abs(kernel_moment(g, 3)) < 1e-10);  // free, by symmetry
    // oracle check of the whole construction through an independent quadrature
    const double mass = oracles::integrate([&](double u) { return g(u); }, -1.0, 1.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-11));
    const double m2 = oracles::integrate([&](double u) { return u * u * g(u); }, -1.0, 1.0);
    CHECK(std::abs(m2) < 1e-10);
}

TEST_CASE("polynomial kernels up to order six satisfy the moment tolerances") {
    for (int k = 0; k <= 6; ++k) {
        const Kernel g = make_kernel("polynomial_order_k", k);
        CHECK(std::abs(kernel_moment(g, 0) - 1.0) <= 1e-10);
        for (int j = 1; j <= k; ++j) CHECK(std::abs(kernel_moment(g, j)) <= 1e-9);
    }
}

TEST_CASE("kernel evaluation is zero outside the support") {
    const Kernel g = make_kernel("epanechnikov");
    CHECK(g(-1.0001) == 0.0);
    CHECK(g(1.0001) == 0.0);
    CHECK(g(0.0) == doctest::Approx(0.75));
}

TEST_CASE("make_kernel rejects inconsistent requests") {
    CHECK_THROWS_AS(make_kernel("gaussian"), DomainError);
    CHECK_THROWS_AS(make_kernel("polynomial_order_k"), DomainError);
    CHECK_THROWS_AS(make_kernel("polynomial_order_k", 20), DomainError);
    CHECK_THROWS_AS(make_kernel("epanechnikov", 3), DomainError);
    CHECK_NOTHROW(make_kernel("epanechnikov", 1));
}

TEST_CASE("bandwidth_main matches the rate formula") {
    CHECK(bandwidth_main(0.01, 1) == doctest::Approx(0.21544346900318837).epsilon(1e-14));
    CHECK(bandwidth_main(0.01, 0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_THROWS_AS(bandwidth_main(1.0, 1), DomainError);
    CHECK_THROWS_AS(bandwidth_main(-0.1, 1), DomainError);
    CHECK_THROWS_AS(bandwidth_main(0.1, -1), DomainError);
    // monotone in epsilon and approaches 1 from below
    double prev = 0.0;
    for (double eps : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
        const double h = bandwidth_main(eps, 1);
        CHECK(h > prev);
        CHECK(h < 1.0);
        prev = h;
    }
}

TEST_CASE("bandwidth_alt matches the rate formula") {
    CHECK(bandwidth_alt(0.01, 2.0) == doctest::Approx(0.046415888336127774).epsilon(1e-14));
    CHECK(bandwidth_alt(0.04, 1.5) == doctest::Approx(0.04).epsilon(1e-14));
    CHECK_THROWS_AS(bandwidth_alt(0.01, 1.0), DomainError);
    CHECK_THROWS_AS(bandwidth_alt(0.01, 0.5), DomainError);
    // exponent shrinks toward zero as rho grows, so the bandwidth rises toward 1
    double prev = 0.0;
    for (double rho : {1.2, 1.5, 2.0, 4.0, 16.0, 256.0}) {
        const double h = bandwidth_alt(0.05, rho);
        CHECK(h > prev);
        CHECK(h < 1.0);
        prev = h;
    }
}

TEST_CASE("gauss_legendre integrates polynomials exactly") {
    const auto& q = gauss_legendre(64);
    double sum = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
        sum += q.weights[i] * std::pow(q.nodes[i], 12);
    CHECK(sum == doctest::Approx(2.0 / 13.0).epsilon(1e-13));
}
