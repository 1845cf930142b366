#pragma once

#include <cstdint>
#include <vector>

#include "smallnoise/model.hpp"

namespace smallnoise {

// One discrete sample path of (X, Y, W). x[0] = spec.x0, w[0] = 0, and the
// same Wiener increments drive X and Y.
struct Path {
    PathGrid grid;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

struct Ensemble {
    ModelSpec spec;
    std::vector<Path> paths;
    std::uint64_t master_seed = 0;
};

// Euler-Maruyama: X_{i+1} = X_i + theta(t_i) X_i dt + eps s1(t_i,X_i) s2(t_i,Y_i) dW_i.
// Deterministic given (spec, grid, epsilon, seed). Throws
// SimulationDivergedError if |X| exceeds the overflow guard (1e12).
Path simulate_path(const ModelSpec& spec, const PathGrid& grid, double epsilon,
                   std::uint64_t seed);

// n_paths independent replicates with counter-based seeds derived from
// master_seed, assembled in replicate order.
Ensemble simulate_ensemble(const ModelSpec& spec, const PathGrid& grid, double epsilon,
                           int n_paths, std::uint64_t master_seed);

// Running supremum over grid points of |sum_{j<i} s1(t_j,X_j) s2(t_j,Y_j) dW_j|,
// one value per grid point.
std::vector<double> noise_running_sup(const Path& path, const ModelSpec& spec);

// The running supremum evaluated at the horizon.
double noise_sup_functional(const Path& path, const ModelSpec& spec);

}  // namespace smallnoise
