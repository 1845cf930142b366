#pragma once

#include <cstdint>
#include <vector>

#include "smallnoise/kernels.hpp"
#include "smallnoise/simulate.hpp"

namespace smallnoise {

// Kernel-weighted sum of path increments,
//   (1/h) sum_i G((t_i - t)/h) (X_{i+1} - X_i),
// the left-point discretization of the convolution against dX. Estimates
// J(t) = theta(t) x_t. Throws BoundaryError when [t + h A, t + h B] leaves
// the observation interval.
double estimate_j(const Path& path, const Kernel& kernel, double bandwidth, double t);

struct ThetaEstimate {
    double value = 0.0;
    bool reliable = true;  // false when |X| at the division index is below 1e-8 |x0|
};

// estimate_j divided by X at the grid index nearest t (ties toward the lower
// index). Throws DegenerateStateError when that state is exactly zero.
ThetaEstimate estimate_theta_main(const Path& path, const Kernel& kernel, double bandwidth,
                                  double t);

// Stopped-process construction: the indicator tracks whether the running
// minimum of X has stayed above x0 exp(-L T) / 2, and z accumulates
// indicator * dX / X, so the drift of z is theta(t) while the indicator holds.
struct StoppedProcess {
    PathGrid grid;
    std::vector<std::uint8_t> indicator;  // non-increasing in i
    std::vector<double> z;                // z[0] = 0, increments gated by the indicator
    bool event_holds = false;             // indicator still set at the horizon
    double threshold = 0.0;
};

// Requires spec.x0 > 0.
StoppedProcess build_stopped_process(const Path& path, const ModelSpec& spec);

// event_holds * (1/h) sum_i G((t - t_i)/h) dz_i; identically zero when the
// threshold event failed.
double estimate_theta_alt(const StoppedProcess& stopped, const Kernel& kernel, double bandwidth,
                          double t);

enum class EstimatorKind { main, alternate };

struct EstimateSeries {
    std::vector<double> eval_times;
    std::vector<double> j_hat;
    std::vector<double> theta_hat;
    std::vector<std::uint8_t> reliable;
    double bandwidth = 0.0;
    std::string kernel_family;
    int kernel_order = 0;
    EstimatorKind kind = EstimatorKind::main;
};

// Batch evaluation over interior times; every window must fit in [0, T].
EstimateSeries estimate_series(const Path& path, const ModelSpec& spec, const Kernel& kernel,
                               double bandwidth, const std::vector<double>& eval_times,
                               EstimatorKind kind);

}  // namespace smallnoise
