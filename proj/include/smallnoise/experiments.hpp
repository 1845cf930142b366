#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "smallnoise/estimate.hpp"
#include "smallnoise/kernels.hpp"
#include "smallnoise/model.hpp"
#include "smallnoise/simulate.hpp"
#include "smallnoise/stats.hpp"

namespace smallnoise {

// Step-count policy: floor of steps_per_unit steps per unit time, tightened
// so dt <= dt_scale (eps * bandwidth)^2 when a bandwidth is in play, keeping
// discretization error below the statistical error being measured.
struct SimPolicy {
    int steps_per_unit = 4096;
    double dt_scale = 1.0;
    std::optional<long> n_steps_override;
    long max_steps = 1L << 23;

    long n_steps(double horizon, double epsilon, double bandwidth) const;
};

// Interior evaluation lattice: `points` equally spaced times in
// [a_frac T, b_frac T].
struct EvalWindow {
    double a_frac = 0.2;
    double b_frac = 0.8;
    int points = 9;

    std::vector<double> lattice(double horizon) const;
};

struct RiskCurve {
    std::vector<double> epsilons;   // strictly decreasing
    std::vector<double> bandwidths;
    std::vector<long> steps;
    std::vector<double> risks;      // max over the lattice of the MC mean square error
    std::vector<double> event_failure_freq;  // alternate estimator only
    int n_replicates = 0;
    LineFit fit;                // log risk vs log epsilon
    double theoretical_slope = 0.0;
};

// Risk curve of the main estimator with bandwidth eps^(1/(k+2)); the
// theoretical log-log slope is 2(k+1)/(k+2) for k = spec.theta.smoothness.k.
RiskCurve risk_curve_main(const ModelSpec& spec, const Kernel& kernel,
                          const std::vector<double>& eps_list, int n_replicates,
                          const EvalWindow& window, std::uint64_t master_seed,
                          const SimPolicy& policy = {}, int n_threads = 0);

// Risk curve of the stopped-process estimator with bandwidth
// eps^(2/(2 rho - 1)); theoretical slope 4 rho / (2 rho - 1).
RiskCurve risk_curve_alt(const ModelSpec& spec, const Kernel& kernel,
                         const std::vector<double>& eps_list, int n_replicates,
                         const EvalWindow& window, std::uint64_t master_seed,
                         const SimPolicy& policy = {}, int n_threads = 0);

// Noise-free bias sweep: the path is the deterministic limit path, so the
// risk is pure squared kernel bias; slope in the bandwidth is 2(order+1).
struct BiasSweep {
    std::vector<double> bandwidths;  // strictly decreasing
    std::vector<double> risks;
    LineFit fit;
    double theoretical_slope = 0.0;
    long n_steps = 0;
};

BiasSweep bias_sweep(const ModelSpec& spec, const Kernel& kernel,
                     const std::vector<double>& bandwidths, const EvalWindow& window,
                     long n_steps = 1L << 17, int n_threads = 0);

// Standardized-statistic check of the asymptotic law of the main estimator:
// samples of eps^(-alpha) (J_hat - J(t) - bias term), alpha = (2k+3)/(2k+4),
// compared against Normal(0, nu(t) int G^2).
struct DistributionCheck {
    std::vector<double> samples;
    double t = 0.0;
    double epsilon = 0.0;
    double bandwidth = 0.0;
    double alpha = 0.0;
    double bias_term = 0.0;
    double nu = 0.0;
    double g_squared = 0.0;
    double reference_variance = 0.0;  // nu * int G^2
    double empirical_variance = 0.0;
    double variance_ratio = 0.0;
    double ks_statistic = 0.0;
    double ks_pvalue = 0.0;
    double sample_mean = 0.0;
    double mean_limit = 0.0;  // 3 * sample std / sqrt(n)
    long n_steps = 0;
};

DistributionCheck distribution_check(const ModelSpec& spec, const Kernel& kernel, double epsilon,
                                     int n_replicates, double t, std::uint64_t master_seed,
                                     const SimPolicy& policy = {}, int n_threads = 0);

// Monte Carlo estimate of nu(t) = E[sigma1(t, X_t) sigma2(t, Y_t)]^2.
double estimate_nu(const ModelSpec& spec, double epsilon, int n_replicates, double t,
                   std::uint64_t master_seed, const SimPolicy& policy = {}, int n_threads = 0);

// Pathwise deviation bound |X_t - x_t| <= e^(L t) eps sup_u |V_u| + delta(t),
// with the slack delta calibrated from the deterministic one-step residuals
// of the limit path (a pure discretization quantity, measured at eps = 0).
struct PathwiseBoundCheck {
    double epsilon = 0.0;
    int n_paths = 0;
    double delta = 0.0;  // slack at the horizon
    long violations = 0;
    long samples = 0;
    double violation_fraction = 0.0;
    double worst_margin = 0.0;  // max of |X-x| - bound; negative when satisfied
    long n_steps = 0;
};

PathwiseBoundCheck check_pathwise_bound(const ModelSpec& spec, double epsilon, int n_paths,
                                        std::uint64_t master_seed, const SimPolicy& policy = {},
                                        int n_threads = 0);

// Mean-square deviation scaling: sup_t of the MC mean of (X_t - x_t)^2 per
// epsilon, with the fitted epsilon-exponent (theory: 2).
struct L2ScalingCheck {
    std::vector<double> epsilons;
    std::vector<double> sup_mean_sq;
    int n_replicates = 0;
    LineFit fit;
    long n_steps = 0;
};

L2ScalingCheck check_l2_scaling(const ModelSpec& spec, const std::vector<double>& eps_list,
                                int n_replicates, std::uint64_t master_seed,
                                const SimPolicy& policy = {}, int n_threads = 0);

// Both deviation bounds evaluated on one pre-simulated ensemble.
struct EnsembleDeviationReport {
    double epsilon = 0.0;
    double delta = 0.0;
    long violations = 0;
    long samples = 0;
    double violation_fraction = 0.0;
    double sup_mean_sq = 0.0;
};

EnsembleDeviationReport check_deviation_bounds(const Ensemble& ensemble);

// Uniform-consistency sweep with bandwidth eps^exponent; requires
// 0 < exponent < 1 so that both the bandwidth and eps/bandwidth vanish.
struct ConsistencyReport {
    std::vector<double> epsilons;
    std::vector<double> bandwidths;
    std::vector<double> sup_risks;
    double bandwidth_exponent = 0.0;
    int n_replicates = 0;
    bool monotone_decreasing = false;
    bool decade_drop = false;  // last < first / 10
    bool passed = false;
};

ConsistencyReport consistency_sweep(const ModelSpec& spec, const Kernel& kernel,
                                    const std::vector<double>& eps_list,
                                    double bandwidth_exponent, int n_replicates,
                                    const EvalWindow& window, std::uint64_t master_seed,
                                    const SimPolicy& policy = {}, int n_threads = 0);

}  // namespace smallnoise
