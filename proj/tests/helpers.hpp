#pragma once

#include "smallnoise/model.hpp"

namespace test_helpers {

inline smallnoise::Descriptor constant_theta(double c) {
    return {"constant", {{"c", c}}, {}};
}

inline smallnoise::Descriptor trig_theta(double a, double b, double omega) {
    return {"trig", {{"a", a}, {"b", b}, {"omega", omega}}, {}};
}

inline smallnoise::Descriptor poly_theta(std::vector<double> coeffs) {
    smallnoise::Descriptor d{"poly", {}, {}};
    d.arrays["coeffs"] = std::move(coeffs);
    return d;
}

// sigma1 = sigma2 = 1, y = Wiener; the workhorse test model.
inline smallnoise::ModelSpec unit_noise_model(const smallnoise::Descriptor& theta, double x0,
                                              double horizon, double bound_L = 0.0,
                                              smallnoise::SmoothnessClass smoothness = {}) {
    smallnoise::ModelSpec spec;
    spec.horizon = horizon;
    spec.x0 = x0;
    spec.theta = smallnoise::make_multiplier(theta, bound_L, smoothness, horizon);
    spec.sigma1 = smallnoise::make_sigma1({"one", {}, {}});
    spec.sigma2 = smallnoise::make_sigma2({"one", {}, {}});
    spec.y_dynamics = {"wiener", {}, {}};
    return spec;
}

}  // namespace test_helpers
