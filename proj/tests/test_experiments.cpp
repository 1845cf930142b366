#include <cmath>

#include <doctest.h>

#include "helpers.hpp"
#include "smallnoise/errors.hpp"
#include "smallnoise/experiments.hpp"
#include "smallnoise/rng.hpp"

using namespace smallnoise;
using test_helpers::constant_theta;
using test_helpers::trig_theta;
using test_helpers::unit_noise_model;

namespace {

SimPolicy quick_policy(long steps) {
    SimPolicy policy;
    policy.n_steps_override = steps;
    return policy;
}

}  // namespace

TEST_CASE("estimate_nu is exactly one for unit volatility factors") {
    auto spec = unit_noise_model(constant_theta(0.0), 1.0, 1.0, 0.1);
    CHECK(estimate_nu(spec, 0.1, 50, 0.5, 7, quick_policy(256)) == 1.0);
}

TEST_CASE("estimate_nu approaches the limit-path value as noise vanishes") {
    auto spec = unit_noise_model(constant_theta(0.0), 1.0, 1.0, 0.1);
    spec.sigma1 = make_sigma1({"linear_growth", {{"kappa", 1.0}}, {}});
    spec.growth_K = 1.0;
    // X_t -> x_t = x0, so nu -> 1 + x0^2 = 2
    const double nu = estimate_nu(spec, 0.001, 400, 0.5, 7, quick_policy(1024));
    CHECK(nu == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("estimate_nu stays finite across the eval lattice for built-ins") {
    auto spec = unit_noise_model(trig_theta(0.5, 0.5, 2.0), 1.0, 1.0);
    spec.sigma1 = make_sigma1({"linear_growth", {{"kappa", 2.0}}, {}});
    spec.growth_K = 2.0;
    spec.sigma2 = make_sigma2({"cos_of_y", {}, {}});
    spec.y_dynamics = {"ou", {{"a", 1.0}, {"b", 1.0}}, {}};
    for (double t : EvalWindow{}.lattice(1.0)) {
        const double nu = estimate_nu(spec, 0.1, 100, t, 11, quick_policy(512));
        CHECK(std::isfinite(nu));
        CHECK(nu > 0.0);
    }
}

TEST_CASE("pathwise deviation bound holds with calibrated slack") {
    auto spec = unit_noise_model(trig_theta(0.5, 0.5, 2.0), 1.0, 1.0);
    const auto check = check_pathwise_bound(spec, 0.1, 200, 13, quick_policy(2048));
    CHECK(check.violations == 0);
    CHECK(check.worst_margin < 0.0);
    CHECK(check.delta < 0.05);
}

TEST_CASE("ensemble deviation report matches the streaming checks") {
    auto spec = unit_noise_model(constant_theta(0.0), 1.0, 1.0, 0.1);
    const Ensemble ensemble = simulate_ensemble(spec, PathGrid(1.0, 1024), 0.1, 500, 29);
    const auto report = check_deviation_bounds(ensemble);
    CHECK(report.violations == 0);
    // X - x = eps W: sup_t E (X-x)^2 = eps^2 T
    CHECK(report.sup_mean_sq == doctest::Approx(0.01).epsilon(0.10));
}

TEST_CASE("mean-square deviation scales as epsilon squared") {
    auto spec = unit_noise_model(trig_theta(0.8, 0.4, 2.0), 1.0, 1.0);
    spec.sigma1 = make_sigma1({"linear_growth", {{"kappa", 1.0}}, {}});
    spec.y_dynamics = {"ou", {{"a", 1.0}, {"b", 1.0}}, {}};
    spec.sigma2 = make_sigma2({"cos_of_y", {}, {}});
    const auto check =
        check_l2_scaling(spec, {0.2, 0.1, 0.05, 0.025}, 800, 37, quick_policy(1024));
    CHECK(check.fit.slope == doctest::Approx(2.0).epsilon(0.075));
}

TEST_CASE("risk curve of a smooth model fits near the theoretical slope") {
    auto spec = unit_noise_model(trig_theta(1.0, 0.5, 2.0), 1.0, 3.0, 1.5, {1, 1.0});
    const Kernel g = make_kernel("epanechnikov");
    SimPolicy policy;
    policy.steps_per_unit = 1024;
    const auto curve =
        risk_curve_main(spec, g, {0.1, 0.0464, 0.0215, 0.01}, 60, EvalWindow{}, 41, policy);
    CHECK(curve.theoretical_slope == doctest::Approx(4.0 / 3.0));
    CHECK(std::abs(curve.fit.slope - curve.theoretical_slope) < 0.3);
    // risks decrease along the sweep
    for (std::size_t i = 1; i < curve.risks.size(); ++i) CHECK(curve.risks[i] < curve.risks[i - 1]);
}

TEST_CASE("risk curve theoretical slope at k = 0 is one") {
    auto spec = unit_noise_model(trig_theta(1.0, 0.5, 2.0), 1.0, 3.0, 1.5, {0, 1.0});
    const Kernel g = make_kernel("tilted");  // order 0 matches k = 0
    const auto curve = risk_curve_main(spec, g, {0.1, 0.05}, 20, EvalWindow{}, 43,
                                       quick_policy(3072));
    CHECK(curve.theoretical_slope == doctest::Approx(1.0));
    CHECK(curve.bandwidths.front() == doctest::Approx(std::sqrt(0.1)));
}

TEST_CASE("pure-noise risk at fixed bandwidth scales as epsilon squared") {
    auto spec = unit_noise_model(constant_theta(0.0), 1.0, 1.0, 0.1);
    const Kernel g = make_kernel("epanechnikov");
    const PathGrid grid(1.0, 4096);
    const double h = 0.2, t = 0.5;
    std::vector<double> eps_grid{0.2, 0.1, 0.05};
    std::vector<double> risks;
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        double sum = 0.0;
        const int n = 800;
        for (int r = 0; r < n; ++r) {
            const Path p =
                simulate_path(spec, grid, eps_grid[e], replicate_seed(substream_seed(47, e), r));
            const double d = estimate_j(p, g, h, t);  // target J = 0
            sum += d * d;
        }
        risks.push_back(sum / n);
    }
    const auto fit = fit_loglog(eps_grid, risks);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.01));
    // and the level matches the predicted eps^2 / h * int G^2
    CHECK(risks.back() ==
          doctest::Approx(0.05 * 0.05 / h * kernel_moment(g, 0, false, true)).epsilon(0.15));
}

TEST_CASE("risk curve rejects a kernel below the smoothness order") {
    auto spec = unit_noise_model(trig_theta(1.0, 0.5, 2.0), 1.0, 3.0, 1.5, {2, {}});
    const Kernel g = make_kernel("epanechnikov");  // order 1 < k = 2
    CHECK_THROWS_AS(risk_curve_main(spec, g, {0.1, 0.05}, 10, EvalWindow{}, 1), DomainError);
}

TEST_CASE("risk curve rejects windows incompatible with the largest bandwidth") {
    auto spec = unit_noise_model(trig_theta(1.0, 0.5, 2.0), 1.0, 1.0, 1.5, {1, {}});
    const Kernel g = make_kernel("epanechnikov");
    // bandwidth(0.1) ~ 0.46 > a = 0.2: window escapes [0, 1]
    CHECK_THROWS_AS(risk_curve_main(spec, g, {0.1, 0.05}, 10, EvalWindow{}, 1), BoundaryError);
}

TEST_CASE("bias sweep slopes match 2(order+1) for orders 0 and 1") {
    auto spec = unit_noise_model(trig_theta(1.0, 0.5, 2.0), 1.0, 3.0, 1.5, {1, {}});
    const std::vector<double> phis{0.4, 0.3, 0.22, 0.16, 0.12};
    SUBCASE("order 0, tilted kernel") {
        const auto sweep = bias_sweep(spec, make_kernel("tilted"), phis, EvalWindow{}, 1 << 16);
        CHECK(sweep.theoretical_slope == 2.0);
        CHECK(std::abs(sweep.fit.slope - 2.0) < 0.2);
    }
    SUBCASE("order 1, epanechnikov kernel") {
        const auto sweep =
            bias_sweep(spec, make_kernel("epanechnikov"), phis, EvalWindow{}, 1 << 16);
        CHECK(sweep.theoretical_slope == 4.0);
        CHECK(std::abs(sweep.fit.slope - 4.0) < 0.2);
    }
}

TEST_CASE("distribution check is Gaussian for unit factors and zero drift") {
    auto spec = unit_noise_model(constant_theta(0.0), 1.0, 2.0, 0.1, {1, {}});
    const Kernel g = make_kernel("epanechnikov");
    const auto check = distribution_check(spec, g, 0.01, 400, 1.0, 53, quick_policy(4096));
    CHECK(check.nu == 1.0);
    CHECK(check.bias_term == 0.0);
    CHECK(check.variance_ratio == doctest::Approx(1.0).epsilon(0.2));
    CHECK(check.ks_pvalue > 0.01);
    CHECK(std::abs(check.sample_mean) <= check.mean_limit);
}

TEST_CASE("consistency sweep validates the bandwidth exponent") {
    auto spec = unit_noise_model(trig_theta(1.0, 0.5, 2.0), 1.0, 3.0, 1.5, {1, {}});
    const Kernel g = make_kernel("epanechnikov");
    CHECK_THROWS_AS(consistency_sweep(spec, g, {0.2, 0.1}, 1.0, 10, EvalWindow{}, 1),
                    ConfigError);
    CHECK_THROWS_AS(consistency_sweep(spec, g, {0.2, 0.1}, 0.0, 10, EvalWindow{}, 1),
                    ConfigError);
    CHECK_NOTHROW(consistency_sweep(spec, g, {0.2, 0.1}, 0.5, 10, EvalWindow{}, 1,
                                    quick_policy(512)));
}

TEST_CASE("risk decays across a decade of epsilon") {
    auto spec = unit_noise_model(trig_theta(1.0, 0.5, 2.0), 1.0, 3.0, 1.5, {1, {}});
    const Kernel g = make_kernel("epanechnikov");
    SimPolicy policy;
    policy.steps_per_unit = 1024;
    const auto report = consistency_sweep(spec, g, {0.2, 0.1, 0.05, 0.025, 0.0125}, 1.0 / 3.0,
                                          80, EvalWindow{}, 61, policy);
    CHECK(report.monotone_decreasing);
    CHECK(report.decade_drop);
    CHECK(report.passed);
}

TEST_CASE("risk decay is insensitive to the y-process family") {
    // same drift and sigma2 = cos(y); only the y dynamics change
    std::vector<Descriptor> families{{"ou", {{"a", 1.0}, {"b", 1.0}}, {}},
                                     {"wiener", {}, {}},
                                     {"const", {{"c", 0.3}}, {}}};
    SimPolicy policy;
    policy.steps_per_unit = 1024;
    const Kernel g = make_kernel("epanechnikov");
    std::vector<double> slopes;
    for (const auto& y : families) {
        auto spec = unit_noise_model(trig_theta(1.0, 0.5, 2.0), 1.0, 3.0, 1.5, {1, 1.0});
        spec.sigma2 = make_sigma2({"cos_of_y", {}, {}});
        spec.y_dynamics = y;
        const auto curve =
            risk_curve_main(spec, g, {0.1, 0.0464, 0.0215}, 100, EvalWindow{}, 83, policy);
        slopes.push_back(curve.fit.slope);
    }
    for (double s : slopes) CHECK(std::abs(s - 4.0 / 3.0) < 0.5);
    // and the fitted slopes agree with one another
    for (double s : slopes) CHECK(std::abs(s - slopes.front()) < 0.3);
}

TEST_CASE("experiments are deterministic given the master seed") {
    auto spec = unit_noise_model(trig_theta(1.0, 0.5, 2.0), 1.0, 3.0, 1.5, {1, {}});
    const Kernel g = make_kernel("epanechnikov");
    SimPolicy policy;
    policy.steps_per_unit = 512;
    const auto a = risk_curve_main(spec, g, {0.1, 0.05}, 40, EvalWindow{}, 71, policy, 2);
    const auto b = risk_curve_main(spec, g, {0.1, 0.05}, 40, EvalWindow{}, 71, policy, 2);
    REQUIRE(a.risks.size() == b.risks.size());
    for (std::size_t i = 0; i < a.risks.size(); ++i) CHECK(a.risks[i] == b.risks[i]);
    CHECK(a.fit.slope == b.fit.slope);
}

TEST_CASE("epsilon lists must be strictly decreasing inside (0,1)") {
    auto spec = unit_noise_model(constant_theta(0.0), 1.0, 1.0, 0.1);
    CHECK_THROWS_AS(check_l2_scaling(spec, {0.1, 0.2}, 10, 1), DomainError);
    CHECK_THROWS_AS(check_l2_scaling(spec, {1.2, 0.5}, 10, 1), DomainError);
    CHECK_THROWS_AS(check_l2_scaling(spec, {}, 10, 1), DomainError);
}

TEST_CASE("step policy tightens with the bandwidth and respects the override") {
    SimPolicy policy;
    CHECK(policy.n_steps(1.0, 0.0, 0.0) == 4096);
    CHECK(policy.n_steps(2.0, 0.0, 0.0) == 8192);
    // dt <= (eps h)^2 binds for small eps
    CHECK(policy.n_steps(1.0, 0.01, 0.2) == static_cast<long>(std::ceil(1.0 / 4e-6)));
    policy.n_steps_override = 123;
    CHECK(policy.n_steps(1.0, 0.01, 0.2) == 123);
}
