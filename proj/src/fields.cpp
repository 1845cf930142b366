#include "smallnoise/fields.hpp"

#include <algorithm>
#include <cmath>

#include "smallnoise/errors.hpp"

namespace smallnoise {

namespace {

double require_param(const Descriptor& desc, const std::string& key) {
    auto it = desc.params.find(key);
    if (it == desc.params.end())
        throw ConfigError("family '" + desc.family + "' requires parameter '" + key + "'");
    return it->second;
}

const std::vector<double>& require_array(const Descriptor& desc, const std::string& key) {
    auto it = desc.arrays.find(key);
    if (it == desc.arrays.end() || it->second.empty())
        throw ConfigError("family '" + desc.family + "' requires array '" + key + "'");
    return it->second;
}

// Horner evaluation of the order-th derivative of sum_i coeffs[i] t^i.
double poly_derivative(const std::vector<double>& coeffs, int order, double t) {
    double value = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) {
        const auto power = static_cast<int>(i);
        if (power < order) break;
        double factor = 1.0;
        for (int j = 0; j < order; ++j) factor *= static_cast<double>(power - j);
        value = value * t + coeffs[i] * factor;
    }
    return value;
}

// Piecewise-linear interpolation with endpoint clamping.
double interpolate(const std::vector<double>& times, const std::vector<double>& values, double t) {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return values[lo] + w * (values[hi] - values[lo]);
}

double sampled_sup_abs(const std::function<double(double)>& f, double horizon) {
    const int n = 8192;
    double sup = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = horizon * i / n;
        sup = std::max(sup, std::abs(f(t)));
    }
    return sup;
}

}  // namespace

Multiplier make_multiplier(const Descriptor& desc, double bound_L,
                           const SmoothnessClass& smoothness, double horizon) {
    Multiplier m;
    m.descriptor = desc;
    m.smoothness = smoothness;

    if (desc.family == "constant") {
        const double c = require_param(desc, "c");
        m.eval = [c](double) { return c; };
        m.deriv = [c](int j, double) { return j == 0 ? c : 0.0; };
        m.has_analytic_derivatives = true;
        m.bound = bound_L > 0.0 ? bound_L : std::max(std::abs(c), 1e-12);
    } else if (desc.family == "poly") {
        const std::vector<double> coeffs = require_array(desc, "coeffs");
        m.eval = [coeffs](double t) { return poly_derivative(coeffs, 0, t); };
        m.deriv = [coeffs](int j, double t) { return poly_derivative(coeffs, j, t); };
        m.has_analytic_derivatives = true;
        m.bound = bound_L > 0.0 ? bound_L : sampled_sup_abs(m.eval, horizon) * (1.0 + 1e-9) + 1e-12;
    } else if (desc.family == "trig") {
        const double a = require_param(desc, "a");
        const double b = require_param(desc, "b");
        const double omega = require_param(desc, "omega");
        m.eval = [a, b, omega](double t) { return a + b * std::sin(omega * t); };
        m.deriv = [a, b, omega](int j, double t) {
            if (j == 0) return a + b * std::sin(omega * t);
            // d^j/dt^j sin(omega t) = omega^j sin(omega t + j pi/2)
            return b * std::pow(omega, j) * std::sin(omega * t + j * 1.5707963267948966);
        };
        m.has_analytic_derivatives = true;
        m.bound = bound_L > 0.0 ? bound_L : std::abs(a) + std::abs(b);
    } else if (desc.family == "tabulated") {
        const std::vector<double> times = require_array(desc, "times");
        const std::vector<double> values = require_array(desc, "values");
        if (times.size() != values.size() || times.size() < 2)
            throw ConfigError("tabulated multiplier needs matching times/values of size >= 2");
        if (!std::is_sorted(times.begin(), times.end()))
            throw ConfigError("tabulated multiplier times must be increasing");
        m.eval = [times, values](double t) { return interpolate(times, values, t); };
        m.has_analytic_derivatives = false;
        if (bound_L > 0.0) {
            m.bound = bound_L;
        } else {
            double sup = 0.0;
            for (double v : values) sup = std::max(sup, std::abs(v));
            m.bound = sup + 1e-12;
        }
    } else {
        throw ConfigError("unknown multiplier family '" + desc.family + "'");
    }
    return m;
}

namespace {

ScalarField2 make_field(const Descriptor& desc, bool is_sigma1) {
    ScalarField2 field;
    field.descriptor = desc;
    if (desc.family == "one") {
        field.eval = [](double, double) { return 1.0; };
    } else if (desc.family == "bounded_sigmoid") {
        const double scale = require_param(desc, "scale");
        field.eval = [scale](double, double v) { return scale / (1.0 + std::exp(-v)); };
    } else if (is_sigma1 && desc.family == "linear_growth") {
        const double kappa = require_param(desc, "kappa");
        if (kappa <= 0.0) throw ConfigError("linear_growth requires kappa > 0");
        field.eval = [kappa](double, double x) { return std::sqrt(kappa * (1.0 + x * x)); };
    } else if (!is_sigma1 && desc.family == "cos_of_y") {
        field.eval = [](double, double y) { return std::cos(y); };
    } else {
        throw ConfigError(std::string("unknown ") + (is_sigma1 ? "sigma1" : "sigma2") +
                          " family '" + desc.family + "'");
    }
    return field;
}

}  // namespace

ScalarField2 make_sigma1(const Descriptor& desc) { return make_field(desc, true); }

ScalarField2 make_sigma2(const Descriptor& desc) { return make_field(desc, false); }

void check_y_descriptor(const Descriptor& desc) {
    if (desc.family == "ou") {
        const double a = require_param(desc, "a");
        if (a < 0.0) throw ConfigError("ou mean-reversion rate must be >= 0");
        require_param(desc, "b");
    } else if (desc.family == "wiener") {
        // no parameters
    } else if (desc.family == "const") {
        require_param(desc, "c");
    } else {
        throw ConfigError("unknown y-process family '" + desc.family + "'");
    }
}

}  // namespace smallnoise
