#pragma once

#include <string>
#include <vector>

#include "smallnoise/fields.hpp"

namespace smallnoise {

// Uniform lattice t_i = i T / n_steps on [0, T].
struct PathGrid {
    double horizon = 1.0;
    int n_steps = 1;

    PathGrid() = default;
    PathGrid(double T, int n);

    double dt() const { return horizon / n_steps; }
    double time(int i) const {
        return i == n_steps ? horizon : horizon * static_cast<double>(i) / n_steps;
    }
    // Nearest grid index to t, ties toward the lower index.
    int nearest_index(double t) const;
};

// Full problem instance: drift multiplier, the two volatility factors, the
// auxiliary y-process, initial state, horizon, and the regularity constants.
struct ModelSpec {
    Multiplier theta;
    ScalarField2 sigma1;
    ScalarField2 sigma2;
    Descriptor y_dynamics;
    double x0 = 1.0;
    double horizon = 1.0;
    double growth_K = 1.0;     // sigma1(t,x)^2 <= growth_K (1 + x^2)
    double sigma2_bound = 1.0; // |sigma2(t,y)| <= sigma2_bound
};

struct ConditionCheck {
    std::string condition;  // "theta_bounded", "sigma2_bounded", "sigma1_growth"
    bool pass = true;
    double worst_value = 0.0;  // largest constraint ratio seen (<= 1 means pass)
    double worst_t = 0.0;
    double worst_state = 0.0;
};

struct ValidationBox {
    double x_lo = -50.0, x_hi = 50.0;  // state box for the sigma1 growth check
    double y_lo = -20.0, y_hi = 20.0;  // state box for the sigma2 bound check
};

// Samples each regularity condition on a dense lattice (t points x state
// points) and reports one record per condition. Non-finite coefficient
// evaluations throw ValidationError naming the coefficient and the point.
std::vector<ConditionCheck> validate_model(const ModelSpec& spec, int lattice_density,
                                           const ValidationBox& box = {});

// Composite Simpson integral of theta over [t0, t1] with the given number of
// subintervals (rounded up to even).
double theta_integral(const Multiplier& theta, double t0, double t1, int subintervals);

// Deterministic limit path x_t = x0 exp(int_0^t theta) sampled on the grid.
// Each grid step is integrated with `refinement` Simpson subintervals.
std::vector<double> limit_path(const ModelSpec& spec, const PathGrid& grid, int refinement = 4);

// Limit path at an arbitrary time.
double limit_path_value(const ModelSpec& spec, double t);

// Derivatives of the product J(t) = theta(t) x_t. Order 0 is theta(t) x_t
// exactly; higher orders use the closed-form derivative chain when theta has
// analytic derivatives and Richardson-extrapolated central differences
// otherwise (orders 1..3 only in that case).
double limit_path_derivative(const ModelSpec& spec, double t, int order);

}  // namespace smallnoise
