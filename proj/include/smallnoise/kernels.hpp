#pragma once

#include <optional>
#include <string>
#include <vector>

namespace smallnoise {

// Compactly supported weight function G on [support_a, support_b] with
// integral one and `order` vanishing moments (moments 1..order are zero).
struct Kernel {
    std::string family;
    int order = 1;
    double support_a = -1.0;
    double support_b = 1.0;
    // Legendre-basis coefficients for the polynomial families; empty for the
    // closed-form classical kernels.
    std::vector<double> coefficients;

    double operator()(double u) const;
};

// Families:
//   rectangular        1 on [-1/2, 1/2]                        order 1
//   triangular         1 - |u| on [-1, 1]                      order 1
//   epanechnikov       (3/4)(1 - u^2) on [-1, 1]               order 1
//   tilted             9/8 + (3/4) u - (15/8) u^2 on [-1, 1]   order 0
//   polynomial_order_k polynomial on [-1, 1] solving the moment
//                      system int u^j G = delta_{j0}, j = 0..k  order k
// `order` is required for polynomial_order_k; for the classical families it
// may be omitted or must equal the family's intrinsic order.
Kernel make_kernel(const std::string& family, std::optional<int> order = std::nullopt);

// int u^j G(u) du; with absolute: int |u^j G(u)| du; with squared:
// int u^(2j) G(u)^2 du. Gauss-Legendre on each half of the support.
double kernel_moment(const Kernel& kernel, int j, bool absolute = false, bool squared = false);

// Bandwidth for the main estimator: eps^(1/(k+2)).
double bandwidth_main(double epsilon, int k);

// Bandwidth for the stopped-process estimator: eps^(2/(2 rho - 1)), rho > 1.
double bandwidth_alt(double epsilon, double rho);

// Legendre polynomial P_n(x) on [-1, 1].
double legendre(int n, double x);

// Gauss-Legendre nodes and weights on [-1, 1].
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const Quadrature& gauss_legendre(int n);

}  // namespace smallnoise
