#include "smallnoise/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "smallnoise/errors.hpp"
#include "smallnoise/parallel.hpp"
#include "smallnoise/rng.hpp"

namespace smallnoise {

namespace {

constexpr int kAccumulatorBlocks = 64;

void check_eps_list(const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw DomainError("epsilon list must not be empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0) || eps_list[i] >= 1.0)
            throw DomainError("epsilon values must lie in (0, 1)");
        if (i > 0 && eps_list[i] >= eps_list[i - 1])
            throw DomainError("epsilon list must be strictly decreasing");
    }
}

void check_window_margins(const EvalWindow& window, double horizon, const Kernel& kernel,
                          double max_bandwidth, double epsilon) {
    const double a = window.a_frac * horizon;
    const double b = window.b_frac * horizon;
    const double lo = a + max_bandwidth * kernel.support_a;
    const double hi = b + max_bandwidth * kernel.support_b;
    if (lo < 0.0 || hi > horizon)
        throw BoundaryError("eval window [" + std::to_string(a) + ", " + std::to_string(b) +
                            "] with bandwidth " + std::to_string(max_bandwidth) + " at epsilon " +
                            std::to_string(epsilon) + " leaves [0, " + std::to_string(horizon) +
                            "]; shrink the bandwidth or the eval window");
}

std::vector<double> lattice_targets_j(const ModelSpec& spec, const std::vector<double>& lattice) {
    std::vector<double> targets(lattice.size());
    for (std::size_t i = 0; i < lattice.size(); ++i)
        targets[i] = spec.theta(lattice[i]) * limit_path_value(spec, lattice[i]);
    return targets;
}

double max_lattice_mean(const std::vector<double>& per_replicate, int n_replicates,
                        std::size_t lattice_size) {
    double worst = 0.0;
    for (std::size_t k = 0; k < lattice_size; ++k) {
        double sum = 0.0;
        for (int r = 0; r < n_replicates; ++r) sum += per_replicate[r * lattice_size + k];
        worst = std::max(worst, sum / n_replicates);
    }
    return worst;
}

}  // namespace

long SimPolicy::n_steps(double horizon, double epsilon, double bandwidth) const {
    if (n_steps_override) return std::max<long>(1, *n_steps_override);
    long n = static_cast<long>(std::ceil(steps_per_unit * horizon));
    if (epsilon > 0.0 && bandwidth > 0.0 && dt_scale > 0.0) {
        const double cap = dt_scale * (epsilon * bandwidth) * (epsilon * bandwidth);
        n = std::max(n, static_cast<long>(std::ceil(horizon / cap)));
    }
    return std::clamp<long>(n, 1, max_steps);
}

std::vector<double> EvalWindow::lattice(double horizon) const {
    if (!(a_frac > 0.0) || !(b_frac < 1.0) || !(a_frac <= b_frac))
        throw DomainError("eval window must satisfy 0 < a_frac <= b_frac < 1");
    if (points < 1) throw DomainError("eval window needs at least one point");
    const double a = a_frac * horizon;
    const double b = b_frac * horizon;
    std::vector<double> ts(points);
    if (points == 1) {
        ts[0] = 0.5 * (a + b);
    } else {
        for (int i = 0; i < points; ++i) ts[i] = a + (b - a) * i / (points - 1);
    }
    return ts;
}

namespace {

RiskCurve risk_curve_impl(const ModelSpec& spec, const Kernel& kernel,
                          const std::vector<double>& eps_list, int n_replicates,
                          const EvalWindow& window, std::uint64_t master_seed,
                          const SimPolicy& policy, int n_threads, bool alternate) {
    check_eps_list(eps_list);
    if (n_replicates < 1) throw DomainError("risk curve: need at least one replicate");
    const int k = spec.theta.smoothness.k;
    if (kernel.order < k)
        throw DomainError("kernel order " + std::to_string(kernel.order) +
                          " below the multiplier smoothness k = " + std::to_string(k));
    const double rho = spec.theta.smoothness.rho();
    if (alternate && !(rho > 1.0))
        throw DomainError("stopped-process risk curve requires rho = k + gamma > 1");
    if (alternate && !(spec.x0 > 0.0))
        throw DomainError("stopped-process risk curve requires x0 > 0");

    auto bandwidth_of = [&](double eps) {
        return alternate ? bandwidth_alt(eps, rho) : bandwidth_main(eps, k);
    };
    check_window_margins(window, spec.horizon, kernel, bandwidth_of(eps_list.front()),
                         eps_list.front());

    const std::vector<double> lattice = window.lattice(spec.horizon);
    const std::size_t n_lattice = lattice.size();
    std::vector<double> targets(n_lattice);
    if (alternate) {
        for (std::size_t i = 0; i < n_lattice; ++i) targets[i] = spec.theta(lattice[i]);
    } else {
        targets = lattice_targets_j(spec, lattice);
    }

    RiskCurve curve;
    curve.epsilons = eps_list;
    curve.n_replicates = n_replicates;
    curve.theoretical_slope =
        alternate ? 4.0 * rho / (2.0 * rho - 1.0) : 2.0 * (k + 1.0) / (k + 2.0);

    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        const double h = bandwidth_of(eps);
        const long n = policy.n_steps(spec.horizon, eps, h);
        const PathGrid grid(spec.horizon, static_cast<int>(n));
        const std::uint64_t stream = substream_seed(master_seed, e);

        std::vector<double> sq(static_cast<std::size_t>(n_replicates) * n_lattice);
        std::vector<std::uint8_t> failed(n_replicates, 0);
        parallel_for(
            n_replicates,
            [&](long r) {
                const Path path = simulate_path(spec, grid, eps, replicate_seed(stream, r));
                if (alternate) {
                    const StoppedProcess sp = build_stopped_process(path, spec);
                    failed[r] = sp.event_holds ? 0 : 1;
                    for (std::size_t i = 0; i < n_lattice; ++i) {
                        const double d =
                            estimate_theta_alt(sp, kernel, h, lattice[i]) - targets[i];
                        sq[r * n_lattice + i] = d * d;
                    }
                } else {
                    for (std::size_t i = 0; i < n_lattice; ++i) {
                        const double d = estimate_j(path, kernel, h, lattice[i]) - targets[i];
                        sq[r * n_lattice + i] = d * d;
                    }
                }
            },
            n_threads);

        curve.bandwidths.push_back(h);
        curve.steps.push_back(n);
        curve.risks.push_back(max_lattice_mean(sq, n_replicates, n_lattice));
        if (alternate) {
            long fails = 0;
            for (auto f : failed) fails += f;
            curve.event_failure_freq.push_back(static_cast<double>(fails) / n_replicates);
        }
    }

    if (eps_list.size() >= 2) curve.fit = fit_loglog(curve.epsilons, curve.risks);
    return curve;
}

}  // namespace

RiskCurve risk_curve_main(const ModelSpec& spec, const Kernel& kernel,
                          const std::vector<double>& eps_list, int n_replicates,
                          const EvalWindow& window, std::uint64_t master_seed,
                          const SimPolicy& policy, int n_threads) {
    return risk_curve_impl(spec, kernel, eps_list, n_replicates, window, master_seed, policy,
                           n_threads, false);
}

RiskCurve risk_curve_alt(const ModelSpec& spec, const Kernel& kernel,
                         const std::vector<double>& eps_list, int n_replicates,
                         const EvalWindow& window, std::uint64_t master_seed,
                         const SimPolicy& policy, int n_threads) {
    return risk_curve_impl(spec, kernel, eps_list, n_replicates, window, master_seed, policy,
                           n_threads, true);
}

BiasSweep bias_sweep(const ModelSpec& spec, const Kernel& kernel,
                     const std::vector<double>& bandwidths, const EvalWindow& window,
                     long n_steps, int n_threads) {
    if (bandwidths.empty()) throw DomainError("bias_sweep: bandwidth list must not be empty");
    for (std::size_t i = 0; i < bandwidths.size(); ++i) {
        if (!(bandwidths[i] > 0.0)) throw DomainError("bias_sweep: bandwidths must be positive");
        if (i > 0 && bandwidths[i] >= bandwidths[i - 1])
            throw DomainError("bias_sweep: bandwidth list must be strictly decreasing");
    }
    check_window_margins(window, spec.horizon, kernel, bandwidths.front(), 0.0);

    const PathGrid grid(spec.horizon, static_cast<int>(n_steps));
    Path path;
    path.grid = grid;
    path.x = limit_path(spec, grid);
    path.y.assign(grid.n_steps + 1, 0.0);
    path.w.assign(grid.n_steps + 1, 0.0);
    path.epsilon = 0.0;

    const std::vector<double> lattice = window.lattice(spec.horizon);
    const std::vector<double> targets = lattice_targets_j(spec, lattice);

    BiasSweep sweep;
    sweep.bandwidths = bandwidths;
    sweep.n_steps = n_steps;
    sweep.theoretical_slope = 2.0 * (kernel.order + 1.0);
    sweep.risks.resize(bandwidths.size());
    parallel_for(
        static_cast<long>(bandwidths.size()),
        [&](long b) {
            double worst = 0.0;
            for (std::size_t i = 0; i < lattice.size(); ++i) {
                const double d = estimate_j(path, kernel, bandwidths[b], lattice[i]) - targets[i];
                worst = std::max(worst, d * d);
            }
            sweep.risks[b] = worst;
        },
        n_threads);
    if (bandwidths.size() >= 2) sweep.fit = fit_loglog(sweep.bandwidths, sweep.risks);
    return sweep;
}

DistributionCheck distribution_check(const ModelSpec& spec, const Kernel& kernel, double epsilon,
                                     int n_replicates, double t, std::uint64_t master_seed,
                                     const SimPolicy& policy, int n_threads) {
    if (n_replicates < 2) throw DomainError("distribution_check: need at least two replicates");
    const int k = spec.theta.smoothness.k;
    if (kernel.order < k)
        throw DomainError("distribution_check: kernel order below multiplier smoothness");

    DistributionCheck check;
    check.t = t;
    check.epsilon = epsilon;
    check.bandwidth = bandwidth_main(epsilon, k);
    check.alpha = (2.0 * k + 3.0) / (2.0 * k + 4.0);

    const long n = policy.n_steps(spec.horizon, epsilon, check.bandwidth);
    check.n_steps = n;
    const PathGrid grid(spec.horizon, static_cast<int>(n));

    const double j_target = limit_path_derivative(spec, t, 0);
    double factorial = 1.0;
    for (int i = 2; i <= k + 1; ++i) factorial *= i;
    // Centering term of the standardized statistic: the integrated Taylor
    // remainder of the kernel smoothing at smoothness order k.
    check.bias_term = std::pow(check.bandwidth, k + 1) * limit_path_derivative(spec, t, k + 1) *
                      kernel_moment(kernel, k + 1) / factorial;

    const double scale = std::pow(epsilon, -check.alpha);
    const int t_index = grid.nearest_index(t);
    const double t_state_time = grid.time(t_index);

    check.samples.resize(n_replicates);
    std::vector<double> nu_samples(n_replicates);
    parallel_for(
        n_replicates,
        [&](long r) {
            const Path path = simulate_path(spec, grid, epsilon, replicate_seed(master_seed, r));
            const double j_hat = estimate_j(path, kernel, check.bandwidth, t);
            check.samples[r] = scale * (j_hat - j_target - check.bias_term);
            const double s =
                spec.sigma1(t_state_time, path.x[t_index]) * spec.sigma2(t_state_time, path.y[t_index]);
            nu_samples[r] = s * s;
        },
        n_threads);

    check.nu = mean(nu_samples);
    check.g_squared = kernel_moment(kernel, 0, false, true);
    check.reference_variance = check.nu * check.g_squared;
    check.empirical_variance = variance(check.samples);
    check.variance_ratio = check.empirical_variance / check.reference_variance;
    const auto ks = ks_test_normal(check.samples, 0.0, std::sqrt(check.reference_variance));
    check.ks_statistic = ks.statistic;
    check.ks_pvalue = ks.p_value;
    check.sample_mean = mean(check.samples);
    check.mean_limit = 3.0 * std::sqrt(check.empirical_variance / n_replicates);
    return check;
}

double estimate_nu(const ModelSpec& spec, double epsilon, int n_replicates, double t,
                   std::uint64_t master_seed, const SimPolicy& policy, int n_threads) {
    if (n_replicates < 1) throw DomainError("estimate_nu: need at least one replicate");
    const long n = policy.n_steps(spec.horizon, epsilon, 0.0);
    const PathGrid grid(spec.horizon, static_cast<int>(n));
    const int t_index = grid.nearest_index(t);
    const double t_time = grid.time(t_index);

    std::vector<double> samples(n_replicates);
    parallel_for(
        n_replicates,
        [&](long r) {
            const Path path = simulate_path(spec, grid, epsilon, replicate_seed(master_seed, r));
            const double s = spec.sigma1(t_time, path.x[t_index]) * spec.sigma2(t_time, path.y[t_index]);
            samples[r] = s * s;
        },
        n_threads);
    return mean(samples);
}

namespace {

// Prefix maxima of |R_k| where R_k = x_k - x_0 - sum_{i<k} theta_i x_i dt is
// the accumulated one-step residual of the limit path under the Euler drift.
// The discrete Gronwall argument bounds |X - x| by
// e^(L t) (eps sup |V| + sup |R|), so 1.5 e^(L t) sup |R| is a safe slack.
std::vector<double> residual_prefix_sup(const ModelSpec& spec, const PathGrid& grid,
                                        const std::vector<double>& limit) {
    const int n = grid.n_steps;
    const double dt = grid.dt();
    std::vector<double> sup(n + 1, 0.0);
    double drift_sum = 0.0;
    double running = 0.0;
    for (int i = 0; i < n; ++i) {
        drift_sum += spec.theta(grid.time(i)) * limit[i] * dt;
        const double residual = limit[i + 1] - limit[0] - drift_sum;
        running = std::max(running, std::abs(residual));
        sup[i + 1] = running;
    }
    return sup;
}

struct PathwiseCounts {
    long violations = 0;
    double worst_margin = -1e300;
};

PathwiseCounts pathwise_violations(const Path& path, const ModelSpec& spec,
                                   const std::vector<double>& limit,
                                   const std::vector<double>& residual_sup, double safety) {
    const auto noise_sup = noise_running_sup(path, spec);
    PathwiseCounts counts;
    const double L = spec.theta.bound;
    for (int i = 1; i <= path.grid.n_steps; ++i) {
        const double growth = std::exp(L * path.grid.time(i));
        const double bound =
            growth * path.epsilon * noise_sup[i] + safety * growth * residual_sup[i];
        const double margin = std::abs(path.x[i] - limit[i]) - bound;
        if (margin > 0.0) ++counts.violations;
        counts.worst_margin = std::max(counts.worst_margin, margin);
    }
    return counts;
}

}  // namespace

PathwiseBoundCheck check_pathwise_bound(const ModelSpec& spec, double epsilon, int n_paths,
                                        std::uint64_t master_seed, const SimPolicy& policy,
                                        int n_threads) {
    if (n_paths < 1) throw DomainError("check_pathwise_bound: need at least one path");
    const long n = policy.n_steps(spec.horizon, epsilon, 0.0);
    const PathGrid grid(spec.horizon, static_cast<int>(n));
    const std::vector<double> limit = limit_path(spec, grid);
    const std::vector<double> residual_sup = residual_prefix_sup(spec, grid, limit);
    const double safety = 1.5;

    PathwiseBoundCheck check;
    check.epsilon = epsilon;
    check.n_paths = n_paths;
    check.n_steps = n;
    check.worst_margin = -1e300;
    check.delta = safety * std::exp(spec.theta.bound * spec.horizon) * residual_sup.back();

    std::vector<PathwiseCounts> counts(n_paths);
    parallel_for(
        n_paths,
        [&](long r) {
            const Path path = simulate_path(spec, grid, epsilon, replicate_seed(master_seed, r));
            counts[r] = pathwise_violations(path, spec, limit, residual_sup, safety);
        },
        n_threads);

    for (const auto& c : counts) {
        check.violations += c.violations;
        check.worst_margin = std::max(check.worst_margin, c.worst_margin);
    }
    check.samples = static_cast<long>(n_paths) * grid.n_steps;
    check.violation_fraction = static_cast<double>(check.violations) / check.samples;
    return check;
}

L2ScalingCheck check_l2_scaling(const ModelSpec& spec, const std::vector<double>& eps_list,
                                int n_replicates, std::uint64_t master_seed,
                                const SimPolicy& policy, int n_threads) {
    check_eps_list(eps_list);
    if (n_replicates < 1) throw DomainError("check_l2_scaling: need at least one replicate");

    L2ScalingCheck check;
    check.epsilons = eps_list;
    check.n_replicates = n_replicates;

    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        const long n = policy.n_steps(spec.horizon, eps, 0.0);
        check.n_steps = n;
        const PathGrid grid(spec.horizon, static_cast<int>(n));
        const std::vector<double> limit = limit_path(spec, grid);
        const std::uint64_t stream = substream_seed(master_seed, e);

        // block-local accumulators merged in block order: schedule independent
        std::vector<std::vector<double>> partial(kAccumulatorBlocks);
        parallel_for_blocks(
            n_replicates, kAccumulatorBlocks,
            [&](int block, long begin, long end) {
                auto& acc = partial[block];
                acc.assign(grid.n_steps + 1, 0.0);
                for (long r = begin; r < end; ++r) {
                    const Path path =
                        simulate_path(spec, grid, eps, replicate_seed(stream, r));
                    for (int i = 0; i <= grid.n_steps; ++i) {
                        const double d = path.x[i] - limit[i];
                        acc[i] += d * d;
                    }
                }
            },
            n_threads);

        std::vector<double> total(grid.n_steps + 1, 0.0);
        for (const auto& acc : partial) {
            if (acc.empty()) continue;
            for (int i = 0; i <= grid.n_steps; ++i) total[i] += acc[i];
        }
        double sup = 0.0;
        for (double v : total) sup = std::max(sup, v / n_replicates);
        check.sup_mean_sq.push_back(sup);
    }

    if (eps_list.size() >= 2) check.fit = fit_loglog(check.epsilons, check.sup_mean_sq);
    return check;
}

EnsembleDeviationReport check_deviation_bounds(const Ensemble& ensemble) {
    if (ensemble.paths.empty())
        throw DomainError("check_deviation_bounds: ensemble has no paths");
    const ModelSpec& spec = ensemble.spec;
    const PathGrid& grid = ensemble.paths.front().grid;
    const std::vector<double> limit = limit_path(spec, grid);
    const std::vector<double> residual_sup = residual_prefix_sup(spec, grid, limit);
    const double safety = 1.5;

    EnsembleDeviationReport report;
    report.epsilon = ensemble.paths.front().epsilon;
    report.delta = safety * std::exp(spec.theta.bound * spec.horizon) * residual_sup.back();

    std::vector<double> mean_sq(grid.n_steps + 1, 0.0);
    for (const auto& path : ensemble.paths) {
        const auto counts = pathwise_violations(path, spec, limit, residual_sup, safety);
        report.violations += counts.violations;
        for (int i = 0; i <= grid.n_steps; ++i) {
            const double d = path.x[i] - limit[i];
            mean_sq[i] += d * d;
        }
    }
    report.samples = static_cast<long>(ensemble.paths.size()) * grid.n_steps;
    report.violation_fraction = static_cast<double>(report.violations) / report.samples;
    for (double v : mean_sq)
        report.sup_mean_sq = std::max(report.sup_mean_sq, v / ensemble.paths.size());
    return report;
}

ConsistencyReport consistency_sweep(const ModelSpec& spec, const Kernel& kernel,
                                    const std::vector<double>& eps_list,
                                    double bandwidth_exponent, int n_replicates,
                                    const EvalWindow& window, std::uint64_t master_seed,
                                    const SimPolicy& policy, int n_threads) {
    check_eps_list(eps_list);
    if (!(bandwidth_exponent > 0.0) || !(bandwidth_exponent < 1.0))
        throw ConfigError("consistency sweep: bandwidth exponent must lie in (0, 1) so that "
                          "both the bandwidth and epsilon/bandwidth vanish");
    if (n_replicates < 1) throw DomainError("consistency sweep: need at least one replicate");

    auto bandwidth_of = [&](double eps) { return std::pow(eps, bandwidth_exponent); };
    check_window_margins(window, spec.horizon, kernel, bandwidth_of(eps_list.front()),
                         eps_list.front());

    const std::vector<double> lattice = window.lattice(spec.horizon);
    const std::size_t n_lattice = lattice.size();
    const std::vector<double> targets = lattice_targets_j(spec, lattice);

    ConsistencyReport report;
    report.epsilons = eps_list;
    report.bandwidth_exponent = bandwidth_exponent;
    report.n_replicates = n_replicates;

    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        const double h = bandwidth_of(eps);
        const long n = policy.n_steps(spec.horizon, eps, h);
        const PathGrid grid(spec.horizon, static_cast<int>(n));
        const std::uint64_t stream = substream_seed(master_seed, e);

        std::vector<double> sq(static_cast<std::size_t>(n_replicates) * n_lattice);
        parallel_for(
            n_replicates,
            [&](long r) {
                const Path path = simulate_path(spec, grid, eps, replicate_seed(stream, r));
                for (std::size_t i = 0; i < n_lattice; ++i) {
                    const double d = estimate_j(path, kernel, h, lattice[i]) - targets[i];
                    sq[r * n_lattice + i] = d * d;
                }
            },
            n_threads);

        report.bandwidths.push_back(h);
        report.sup_risks.push_back(max_lattice_mean(sq, n_replicates, n_lattice));
    }

    report.monotone_decreasing = true;
    for (std::size_t i = 1; i < report.sup_risks.size(); ++i)
        if (report.sup_risks[i] >= report.sup_risks[i - 1]) report.monotone_decreasing = false;
    report.decade_drop =
        report.sup_risks.back() < report.sup_risks.front() / 10.0;
    report.passed = report.monotone_decreasing && report.decade_drop;
    return report;
}

}  // namespace smallnoise
