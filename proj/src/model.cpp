#include "smallnoise/model.hpp"

#include <cmath>
#include <functional>

#include "smallnoise/errors.hpp"

namespace smallnoise {

PathGrid::PathGrid(double T, int n) : horizon(T), n_steps(n) {
    if (!(T > 0.0)) throw DomainError("PathGrid: horizon must be positive");
    if (n < 1) throw DomainError("PathGrid: need at least one step");
}

int PathGrid::nearest_index(double t) const {
    if (t <= 0.0) return 0;
    if (t >= horizon) return n_steps;
    const double pos = t / dt();
    const int lo = static_cast<int>(pos);
    const double frac = pos - lo;
    // ties (frac == 0.5) go to the lower index
    const int idx = frac > 0.5 ? lo + 1 : lo;
    return std::min(idx, n_steps);
}

namespace {

void check_finite(double value, const char* coefficient, double t, double state) {
    if (!std::isfinite(value))
        throw ValidationError(std::string("non-finite ") + coefficient + " at t=" +
                              std::to_string(t) + ", state=" + std::to_string(state));
}

}  // namespace

std::vector<ConditionCheck> validate_model(const ModelSpec& spec, int lattice_density,
                                           const ValidationBox& box) {
    if (lattice_density < 100)
        throw DomainError("validate_model: lattice_density must be >= 100");
    if (!(spec.horizon > 0.0)) throw DomainError("validate_model: horizon must be positive");

    const int nt = lattice_density;
    const int ns = lattice_density;
    std::vector<ConditionCheck> checks;

    {
        ConditionCheck c{"theta_bounded", true, 0.0, 0.0, 0.0};
        for (int i = 0; i <= nt; ++i) {
            const double t = spec.horizon * i / nt;
            const double v = spec.theta(t);
            check_finite(v, "theta", t, 0.0);
            const double ratio = std::abs(v) / spec.theta.bound;
            if (ratio > c.worst_value) {
                c.worst_value = ratio;
                c.worst_t = t;
            }
        }
        c.pass = c.worst_value <= 1.0 + 1e-12;
        checks.push_back(c);
    }

    {
        ConditionCheck c{"sigma2_bounded", true, 0.0, 0.0, 0.0};
        for (int i = 0; i <= nt; ++i) {
            const double t = spec.horizon * i / nt;
            for (int j = 0; j <= ns; ++j) {
                const double y = box.y_lo + (box.y_hi - box.y_lo) * j / ns;
                const double v = spec.sigma2(t, y);
                check_finite(v, "sigma2", t, y);
                const double ratio = std::abs(v) / spec.sigma2_bound;
                if (ratio > c.worst_value) {
                    c.worst_value = ratio;
                    c.worst_t = t;
                    c.worst_state = y;
                }
            }
        }
        c.pass = c.worst_value <= 1.0 + 1e-12;
        checks.push_back(c);
    }

    {
        ConditionCheck c{"sigma1_growth", true, 0.0, 0.0, 0.0};
        for (int i = 0; i <= nt; ++i) {
            const double t = spec.horizon * i / nt;
            for (int j = 0; j <= ns; ++j) {
                const double x = box.x_lo + (box.x_hi - box.x_lo) * j / ns;
                const double v = spec.sigma1(t, x);
                check_finite(v, "sigma1", t, x);
                const double ratio = v * v / (spec.growth_K * (1.0 + x * x));
                if (ratio > c.worst_value) {
                    c.worst_value = ratio;
                    c.worst_t = t;
                    c.worst_state = x;
                }
            }
        }
        c.pass = c.worst_value <= 1.0 + 1e-12;
        checks.push_back(c);
    }

    return checks;
}

double theta_integral(const Multiplier& theta, double t0, double t1, int subintervals) {
    if (t1 == t0) return 0.0;
    int m = std::max(2, subintervals);
    if (m % 2 != 0) ++m;
    const double h = (t1 - t0) / m;
    double sum = theta(t0) + theta(t1);
    for (int i = 1; i < m; ++i) {
        const double t = t0 + h * i;
        sum += theta(t) * (i % 2 == 0 ? 2.0 : 4.0);
    }
    const double value = sum * h / 3.0;
    if (!std::isfinite(value))
        throw ValidationError("non-finite theta integral over [" + std::to_string(t0) + ", " +
                              std::to_string(t1) + "]");
    return value;
}

std::vector<double> limit_path(const ModelSpec& spec, const PathGrid& grid, int refinement) {
    if (refinement < 1) throw DomainError("limit_path: refinement must be >= 1");
    std::vector<double> x(grid.n_steps + 1);
    x[0] = spec.x0;
    double cumulative = 0.0;
    for (int i = 0; i < grid.n_steps; ++i) {
        cumulative += theta_integral(spec.theta, grid.time(i), grid.time(i + 1), 2 * refinement);
        x[i + 1] = spec.x0 * std::exp(cumulative);
    }
    return x;
}

double limit_path_value(const ModelSpec& spec, double t) {
    const int sub = std::max(256, static_cast<int>(std::ceil(std::abs(t) * 2048.0)));
    return spec.x0 * std::exp(theta_integral(spec.theta, 0.0, t, sub));
}

namespace {

double binomial(int n, int k) {
    double value = 1.0;
    for (int i = 1; i <= k; ++i) value = value * (n - k + i) / i;
    return value;
}

// x^(m) for x' = theta x via Leibniz: x^(m+1) = sum_i C(m,i) theta^(i) x^(m-i).
std::vector<double> limit_state_derivatives(const Multiplier& theta, double t, double xt,
                                            int order) {
    std::vector<double> xd(order + 1);
    xd[0] = xt;
    for (int m = 0; m < order; ++m) {
        double acc = 0.0;
        for (int i = 0; i <= m; ++i) acc += binomial(m, i) * theta.deriv(i, t) * xd[m - i];
        xd[m + 1] = acc;
    }
    return xd;
}

double finite_difference_j(const std::function<double(double)>& J, double t, int order, double h) {
    auto stencil = [&](double step) {
        switch (order) {
            case 1:
                return (J(t + step) - J(t - step)) / (2.0 * step);
            case 2:
                return (J(t + step) - 2.0 * J(t) + J(t - step)) / (step * step);
            case 3:
                return (J(t + 2.0 * step) - 2.0 * J(t + step) + 2.0 * J(t - step) -
                        J(t - 2.0 * step)) /
                       (2.0 * step * step * step);
            default:
                throw UnsupportedOrderError(
                    "finite-difference derivatives available for orders 1..3 only");
        }
    };
    // one Richardson step on the O(h^2) stencils
    return (4.0 * stencil(h / 2.0) - stencil(h)) / 3.0;
}

}  // namespace

double limit_path_derivative(const ModelSpec& spec, double t, int order) {
    if (order < 0) throw DomainError("limit_path_derivative: order must be >= 0");
    if (order > spec.theta.smoothness.k + 1)
        throw UnsupportedOrderError("requested derivative order " + std::to_string(order) +
                                    " exceeds declared smoothness k+1 = " +
                                    std::to_string(spec.theta.smoothness.k + 1));
    const double xt = limit_path_value(spec, t);
    if (order == 0) return spec.theta(t) * xt;

    if (spec.theta.has_analytic_derivatives) {
        const auto xd = limit_state_derivatives(spec.theta, t, xt, order);
        double acc = 0.0;
        for (int i = 0; i <= order; ++i)
            acc += binomial(order, i) * spec.theta.deriv(i, t) * xd[order - i];
        return acc;
    }
    const auto J = [&spec](double s) { return spec.theta(s) * limit_path_value(spec, s); };
    return finite_difference_j(J, t, order, spec.horizon * 1e-4);
}

}  // namespace smallnoise
