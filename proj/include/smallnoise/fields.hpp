#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace smallnoise {

// Structured tag identifying a built-in coefficient family and its
// parameters; this is what configs serialize and reports echo back.
struct Descriptor {
    std::string family;
    std::map<std::string, double> params;
    std::map<std::string, std::vector<double>> arrays;

    friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

// Coefficient of time and one state variable, sigma1(t, x) or sigma2(t, y).
struct ScalarField2 {
    Descriptor descriptor;
    std::function<double(double, double)> eval;

    double operator()(double t, double v) const { return eval(t, v); }
};

struct SmoothnessClass {
    int k = 1;                           // derivatives available to the estimator theory
    std::optional<double> holder_gamma;  // Holder exponent of the k-th derivative

    double rho() const { return k + holder_gamma.value_or(1.0); }

    friend bool operator==(const SmoothnessClass&, const SmoothnessClass&) = default;
};

// The time-varying drift multiplier theta(t).
struct Multiplier {
    Descriptor descriptor;
    std::function<double(double)> eval;
    // deriv(j, t) = theta^(j)(t); only set when the family has closed-form
    // derivatives (all built-ins except tabulated).
    std::function<double(int, double)> deriv;
    bool has_analytic_derivatives = false;
    double bound = 1.0;  // L with |theta| <= L on [0, T]
    SmoothnessClass smoothness;

    double operator()(double t) const { return eval(t); }
};

// theta families: constant(c), poly(c0..cm), trig(a,b,omega) = a + b sin(omega t),
// tabulated(times, values) with linear interpolation.
// bound_L <= 0 requests an automatic bound (tight analytic where available,
// dense-sampled otherwise; horizon is needed for the sampled case).
Multiplier make_multiplier(const Descriptor& desc, double bound_L,
                           const SmoothnessClass& smoothness, double horizon);

// sigma1 families: one, linear_growth(kappa) = sqrt(kappa (1 + x^2)),
// bounded_sigmoid(scale) = scale / (1 + exp(-x)).
ScalarField2 make_sigma1(const Descriptor& desc);

// sigma2 families: one, bounded_sigmoid(scale), cos_of_y = cos(y).
ScalarField2 make_sigma2(const Descriptor& desc);

// y-process families accepted by the simulator: ou(a,b), wiener, const(c).
void check_y_descriptor(const Descriptor& desc);

}  // namespace smallnoise
