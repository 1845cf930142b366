#include "smallnoise/simulate.hpp"

#include <cmath>

#include "smallnoise/errors.hpp"
#include "smallnoise/rng.hpp"

namespace smallnoise {

namespace {

constexpr double kOverflowGuard = 1e12;

struct YStepper {
    enum class Kind { ou, wiener, constant } kind;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double decay = 1.0;       // exp(-a dt)
    double shock_scale = 0.0; // std of the conditional OU innovation per unit normal

    YStepper(const Descriptor& desc, double dt) {
        if (desc.family == "ou") {
            kind = Kind::ou;
            a = desc.params.at("a");
            b = desc.params.at("b");
            decay = std::exp(-a * dt);
            // exact conditional moments; a -> 0 limit is sqrt(dt)
            shock_scale = a > 0.0 ? b * std::sqrt((1.0 - std::exp(-2.0 * a * dt)) / (2.0 * a))
                                  : b * std::sqrt(dt);
        } else if (desc.family == "wiener") {
            kind = Kind::wiener;
        } else if (desc.family == "const") {
            kind = Kind::constant;
            c = desc.params.at("c");
        } else {
            throw ConfigError("unknown y-process family '" + desc.family + "'");
        }
    }

    double initial() const { return kind == Kind::constant ? c : 0.0; }

    // z is the unit normal behind the Wiener increment dW = sqrt(dt) z.
    double step(double y, double dw, double z) const {
        switch (kind) {
            case Kind::ou:
                return y * decay + shock_scale * z;
            case Kind::wiener:
                return y + dw;
            case Kind::constant:
                return y;
        }
        return y;
    }
};

}  // namespace

Path simulate_path(const ModelSpec& spec, const PathGrid& grid, double epsilon,
                   std::uint64_t seed) {
    if (epsilon < 0.0) throw DomainError("simulate_path: epsilon must be >= 0");

    Path path;
    path.grid = grid;
    path.epsilon = epsilon;
    path.seed = seed;
    const int n = grid.n_steps;
    path.x.resize(n + 1);
    path.y.resize(n + 1);
    path.w.resize(n + 1);

    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const YStepper y_stepper(spec.y_dynamics, dt);

    Rng rng(seed);
    double x = spec.x0;
    double y = y_stepper.initial();
    double w = 0.0;
    path.x[0] = x;
    path.y[0] = y;
    path.w[0] = w;

    for (int i = 0; i < n; ++i) {
        const double t = grid.time(i);
        const double z = rng.next_normal();
        const double dw = sqrt_dt * z;
        const double diffusion = spec.sigma1(t, x) * spec.sigma2(t, y);
        x += spec.theta(t) * x * dt + epsilon * diffusion * dw;
        if (!std::isfinite(x) || std::abs(x) > kOverflowGuard)
            throw SimulationDivergedError("state exceeded overflow guard at step " +
                                              std::to_string(i + 1),
                                          i + 1);
        y = y_stepper.step(y, dw, z);
        w += dw;
        path.x[i + 1] = x;
        path.y[i + 1] = y;
        path.w[i + 1] = w;
    }
    return path;
}

Ensemble simulate_ensemble(const ModelSpec& spec, const PathGrid& grid, double epsilon,
                           int n_paths, std::uint64_t master_seed) {
    if (n_paths < 1) throw DomainError("simulate_ensemble: need at least one path");
    Ensemble ensemble;
    ensemble.spec = spec;
    ensemble.master_seed = master_seed;
    ensemble.paths.reserve(n_paths);
    for (int i = 0; i < n_paths; ++i) {
        try {
            ensemble.paths.push_back(
                simulate_path(spec, grid, epsilon, replicate_seed(master_seed, i)));
        } catch (const SimulationDivergedError& e) {
            throw SimulationDivergedError(std::string(e.what()) + " (replicate " +
                                              std::to_string(i) + ")",
                                          e.step_index, i);
        }
    }
    return ensemble;
}

std::vector<double> noise_running_sup(const Path& path, const ModelSpec& spec) {
    const int n = path.grid.n_steps;
    std::vector<double> sup(n + 1, 0.0);
    double integral = 0.0;
    double running = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = path.grid.time(i);
        const double dw = path.w[i + 1] - path.w[i];
        integral += spec.sigma1(t, path.x[i]) * spec.sigma2(t, path.y[i]) * dw;
        running = std::max(running, std::abs(integral));
        sup[i + 1] = running;
    }
    return sup;
}

double noise_sup_functional(const Path& path, const ModelSpec& spec) {
    return noise_running_sup(path, spec).back();
}

}  // namespace smallnoise
