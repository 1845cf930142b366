#include "smallnoise/kernels.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "smallnoise/errors.hpp"

namespace smallnoise {

double legendre(int n, double x) {
    if (n == 0) return 1.0;
    double p0 = 1.0, p1 = x;
    for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

const Quadrature& gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, Quadrature> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev-like initial guess.
        double x = std::cos(3.141592653589793 * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const double p = legendre(n, x);
            const double pm1 = legendre(n - 1, x);
            const double dp = n * (x * p - pm1) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double pm1 = legendre(n - 1, x);
        const double dp = n * (x * legendre(n, x) - pm1) / (x * x - 1.0);
        q.nodes[n - 1 - i] = x;
        q.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(q)).first->second;
}

double Kernel::operator()(double u) const {
    if (u < support_a || u > support_b) return 0.0;
    if (family == "rectangular") return 1.0;
    if (family == "triangular") return 1.0 - std::abs(u);
    if (family == "epanechnikov") return 0.75 * (1.0 - u * u);
    double value = 0.0;
    for (std::size_t m = 0; m < coefficients.size(); ++m)
        value += coefficients[m] * legendre(static_cast<int>(m), u);
    return value;
}

namespace {

// Integrates f over [a, b], splitting at zero so kernels with an interior
// kink at the origin (triangular) are still integrated exactly.
double integrate_support(const Kernel& kernel, int j, bool absolute, bool squared) {
    const auto& q = gauss_legendre(64);
    auto piece = [&](double a, double b) {
        if (b <= a) return 0.0;
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        double sum = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            const double u = mid + half * q.nodes[i];
            const double g = kernel(u);
            double f;
            if (squared) {
                const double uj = j == 0 ? 1.0 : std::pow(u, j);
                f = uj * uj * g * g;
            } else {
                f = (j == 0 ? 1.0 : std::pow(u, j)) * g;
                if (absolute) f = std::abs(f);
            }
            sum += q.weights[i] * f;
        }
        return sum * half;
    };
    if (kernel.support_a < 0.0 && kernel.support_b > 0.0)
        return piece(kernel.support_a, 0.0) + piece(0.0, kernel.support_b);
    return piece(kernel.support_a, kernel.support_b);
}

// Moment-system construction in the Legendre basis: find c_0..c_k with
// int u^j sum_m c_m P_m(u) du = delta_{j0} for j = 0..k. The matrix is lower
// triangular by orthogonality, hence nonsingular; solved by plain Gaussian
// elimination with a singularity guard.
std::vector<double> solve_moment_system(int k) {
    const int n = k + 1;
    const auto& q = gauss_legendre(64);
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (int j = 0; j < n; ++j) {
        for (int m = 0; m < n; ++m) {
            double integral = 0.0;
            for (std::size_t i = 0; i < q.nodes.size(); ++i) {
                const double u = q.nodes[i];
                integral += q.weights[i] * std::pow(u, j) * legendre(m, u);
            }
            a[j][m] = integral;
        }
        a[j][n] = j == 0 ? 1.0 : 0.0;
    }
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-13)
            throw KernelConstructionError("singular moment system at order " + std::to_string(k));
        std::swap(a[col], a[pivot]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> coeffs(n);
    for (int m = 0; m < n; ++m) coeffs[m] = a[m][n] / a[m][m];
    return coeffs;
}

void verify_kernel(const Kernel& kernel) {
    const double unit = kernel_moment(kernel, 0);
    if (std::abs(unit - 1.0) > 1e-10)
        throw KernelConstructionError("kernel '" + kernel.family +
                                      "' does not integrate to one: " + std::to_string(unit));
    for (int j = 1; j <= kernel.order; ++j) {
        const double mj = kernel_moment(kernel, j);
        if (std::abs(mj) > 1e-9)
            throw KernelConstructionError("kernel '" + kernel.family + "' moment " +
                                          std::to_string(j) + " = " + std::to_string(mj) +
                                          " exceeds tolerance");
    }
}

}  // namespace

Kernel make_kernel(const std::string& family, std::optional<int> order) {
    Kernel kernel;
    kernel.family = family;
    if (family == "rectangular") {
        kernel.support_a = -0.5;
        kernel.support_b = 0.5;
        kernel.order = 1;
    } else if (family == "triangular" || family == "epanechnikov") {
        kernel.order = 1;
    } else if (family == "tilted") {
        // Strictly order zero: first moment 1/2, second moment removed so the
        // leading bias term is clean. G = 9/8 + (3/4) u - (15/8) u^2.
        kernel.order = 0;
        kernel.coefficients = {0.5, 0.75, -1.25};
    } else if (family == "polynomial_order_k") {
        if (!order.has_value())
            throw DomainError("polynomial_order_k requires an explicit order");
        if (*order < 0 || *order > 8)
            throw DomainError("polynomial_order_k supports orders 0..8");
        kernel.order = *order;
        kernel.coefficients = solve_moment_system(*order);
    } else {
        throw DomainError("unknown kernel family '" + family + "'");
    }
    if (family != "polynomial_order_k" && order.has_value() && *order != kernel.order)
        throw DomainError("kernel family '" + family + "' has intrinsic order " +
                          std::to_string(kernel.order) + "; requested " + std::to_string(*order));
    verify_kernel(kernel);
    return kernel;
}

double kernel_moment(const Kernel& kernel, int j, bool absolute, bool squared) {
    if (j < 0) throw DomainError("kernel_moment: order must be >= 0");
    return integrate_support(kernel, j, absolute, squared);
}

double bandwidth_main(double epsilon, int k) {
    if (!(epsilon > 0.0) || epsilon >= 1.0)
        throw DomainError("bandwidth_main: epsilon must lie in (0, 1)");
    if (k < 0) throw DomainError("bandwidth_main: k must be >= 0");
    return std::pow(epsilon, 1.0 / (k + 2.0));
}

double bandwidth_alt(double epsilon, double rho) {
    if (!(epsilon > 0.0) || epsilon >= 1.0)
        throw DomainError("bandwidth_alt: epsilon must lie in (0, 1)");
    if (!(rho > 1.0)) throw DomainError("bandwidth_alt: rho must be > 1");
    return std::pow(epsilon, 2.0 / (2.0 * rho - 1.0));
}

}  // namespace smallnoise
