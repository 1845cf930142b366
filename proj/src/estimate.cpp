#include "smallnoise/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "smallnoise/errors.hpp"

namespace smallnoise {

namespace {

constexpr double kBoundaryTol = 1e-9;

void check_window(double lo, double hi, double horizon, double t, double bandwidth) {
    if (lo < -kBoundaryTol || hi > horizon + kBoundaryTol)
        throw BoundaryError("kernel window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "] leaves [0, " + std::to_string(horizon) + "] at t=" +
                            std::to_string(t) + ", bandwidth=" + std::to_string(bandwidth) +
                            "; shrink the bandwidth or the eval window");
}

// Increment indices i with t_i inside [lo, hi], clamped to [0, n-1].
std::pair<int, int> increment_range(const PathGrid& grid, double lo, double hi) {
    const double dt = grid.dt();
    int first = static_cast<int>(std::ceil(lo / dt - 1e-12));
    int last = static_cast<int>(std::floor(hi / dt + 1e-12));
    first = std::max(first, 0);
    last = std::min(last, grid.n_steps - 1);
    return {first, last};
}

}  // namespace

double estimate_j(const Path& path, const Kernel& kernel, double bandwidth, double t) {
    if (!(bandwidth > 0.0)) throw DomainError("estimate_j: bandwidth must be positive");
    const double lo = t + bandwidth * kernel.support_a;
    const double hi = t + bandwidth * kernel.support_b;
    check_window(lo, hi, path.grid.horizon, t, bandwidth);

    const auto [first, last] = increment_range(path.grid, lo, hi);
    double sum = 0.0;
    for (int i = first; i <= last; ++i) {
        const double u = (path.grid.time(i) - t) / bandwidth;
        sum += kernel(u) * (path.x[i + 1] - path.x[i]);
    }
    return sum / bandwidth;
}

ThetaEstimate estimate_theta_main(const Path& path, const Kernel& kernel, double bandwidth,
                                  double t) {
    const double j_hat = estimate_j(path, kernel, bandwidth, t);
    const int idx = path.grid.nearest_index(t);
    const double state = path.x[idx];
    if (state == 0.0)
        throw DegenerateStateError("state is zero at grid index " + std::to_string(idx) +
                                   "; cannot divide the drift estimate");
    ThetaEstimate est;
    est.value = j_hat / state;
    est.reliable = std::abs(state) >= 1e-8 * std::abs(path.x.front());
    return est;
}

StoppedProcess build_stopped_process(const Path& path, const ModelSpec& spec) {
    if (!(spec.x0 > 0.0))
        throw DomainError("build_stopped_process: requires a known positive x0");

    StoppedProcess sp;
    sp.grid = path.grid;
    sp.threshold = 0.5 * spec.x0 * std::exp(-spec.theta.bound * spec.horizon);
    const int n = path.grid.n_steps;
    sp.indicator.resize(n + 1);
    sp.z.resize(n + 1);

    double running_min = path.x[0];
    bool alive = running_min >= sp.threshold;
    sp.indicator[0] = alive ? 1 : 0;
    sp.z[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dz = alive ? (path.x[i + 1] - path.x[i]) / path.x[i] : 0.0;
        sp.z[i + 1] = sp.z[i] + dz;
        running_min = std::min(running_min, path.x[i + 1]);
        alive = alive && running_min >= sp.threshold;
        sp.indicator[i + 1] = alive ? 1 : 0;
    }
    sp.event_holds = alive;
    return sp;
}

double estimate_theta_alt(const StoppedProcess& stopped, const Kernel& kernel, double bandwidth,
                          double t) {
    if (!(bandwidth > 0.0)) throw DomainError("estimate_theta_alt: bandwidth must be positive");
    // argument (t - s)/h maps s into [t - h B, t - h A]
    const double lo = t - bandwidth * kernel.support_b;
    const double hi = t - bandwidth * kernel.support_a;
    check_window(lo, hi, stopped.grid.horizon, t, bandwidth);
    if (!stopped.event_holds) return 0.0;

    const auto [first, last] = increment_range(stopped.grid, lo, hi);
    double sum = 0.0;
    for (int i = first; i <= last; ++i) {
        const double u = (t - stopped.grid.time(i)) / bandwidth;
        sum += kernel(u) * (stopped.z[i + 1] - stopped.z[i]);
    }
    return sum / bandwidth;
}

EstimateSeries estimate_series(const Path& path, const ModelSpec& spec, const Kernel& kernel,
                               double bandwidth, const std::vector<double>& eval_times,
                               EstimatorKind kind) {
    EstimateSeries series;
    series.eval_times = eval_times;
    series.bandwidth = bandwidth;
    series.kernel_family = kernel.family;
    series.kernel_order = kernel.order;
    series.kind = kind;
    series.j_hat.reserve(eval_times.size());
    series.theta_hat.reserve(eval_times.size());
    series.reliable.reserve(eval_times.size());

    if (kind == EstimatorKind::main) {
        for (double t : eval_times) {
            series.j_hat.push_back(estimate_j(path, kernel, bandwidth, t));
            const auto est = estimate_theta_main(path, kernel, bandwidth, t);
            series.theta_hat.push_back(est.value);
            series.reliable.push_back(est.reliable ? 1 : 0);
        }
    } else {
        const StoppedProcess sp = build_stopped_process(path, spec);
        for (double t : eval_times) {
            const double theta = estimate_theta_alt(sp, kernel, bandwidth, t);
            series.theta_hat.push_back(theta);
            series.j_hat.push_back(theta * path.x[path.grid.nearest_index(t)]);
            series.reliable.push_back(1);
        }
    }
    return series;
}

}  // namespace smallnoise
