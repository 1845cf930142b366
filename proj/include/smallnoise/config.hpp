#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smallnoise/experiments.hpp"
#include "smallnoise/fields.hpp"
#include "smallnoise/kernels.hpp"
#include "smallnoise/model.hpp"

namespace smallnoise {

struct ThetaConfig {
    Descriptor descriptor{"constant", {{"c", 1.0}}, {}};
    double bound_L = 0.0;  // <= 0 requests the automatic bound
    SmoothnessClass smoothness;
};

struct ModelConfig {
    ThetaConfig theta;
    Descriptor sigma1{"one", {}, {}};
    Descriptor sigma2{"one", {}, {}};
    Descriptor y{"wiener", {}, {}};
    double x0 = 1.0;
    double horizon = 1.0;
    double growth_K = 1.0;
    double sigma2_bound = 1.0;
};

struct KernelConfig {
    std::string family = "epanechnikov";
    std::optional<int> order;
};

// rule: "main" eps^(1/(k+2)), "alt" eps^(2/(2 rho - 1)),
// "power" eps^exponent, "fixed" a constant bandwidth.
struct BandwidthConfig {
    std::string rule = "main";
    double exponent = 0.5;
    double value = 0.1;
};

struct OutputConfig {
    std::string dir = "out";
    bool split_paths = false;
};

struct ValidationConfig {
    int lattice_density = 256;
    ValidationBox box;
};

// Pass/fail thresholds; defaults match the documented acceptance gates.
struct AssertionsConfig {
    double slope_tolerance = 0.3;          // rate fits vs theoretical slope
    double alt_slope_tolerance = 0.4;      // stopped-process rate fit
    double bias_slope_tolerance = 0.2;     // noise-free bias sweep
    double l2_slope_tolerance = 0.15;      // mean-square deviation exponent vs 2
    double closed_form_tolerance = 0.05;   // sup E(X-x)^2 vs eps^2 T
    double variance_ratio_tolerance = 0.15;
    double ks_p_min = 0.01;
    double event_failure_max = 0.01;
};

struct RunConfig {
    ModelConfig model;
    KernelConfig kernel;
    std::string estimator = "main";  // "main" | "alternate"
    BandwidthConfig bandwidth;
    std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
    double epsilon = 0.1;            // single-path operations
    std::vector<double> phi_list;    // non-empty switches `rates` to the bias sweep
    int n_replicates = 500;
    int n_paths = 1;                 // `simulate` subcommand
    EvalWindow eval_window;
    double eval_time = -1.0;         // `normality` evaluation time; < 0 = window midpoint
    std::uint64_t master_seed = 0;
    bool seed_set = false;           // master_seed is mandatory in config files
    long n_steps = 0;                // 0 = derive from the policy below
    int steps_per_unit = 4096;
    double dt_scale = 1.0;
    int n_threads = 0;
    std::optional<std::string> path_file;  // `estimate` input path CSV
    OutputConfig output;
    ValidationConfig validation;
    AssertionsConfig assertions;
};

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

RunConfig load_config_file(const std::string& path);

// Applies "dotted.path=value" to the JSON document; the value is parsed as
// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

ModelSpec build_model(const ModelConfig& config);
Kernel build_kernel(const KernelConfig& config);
double bandwidth_for(const RunConfig& config, const ModelSpec& spec, double epsilon);
SimPolicy policy_for(const RunConfig& config);

}  // namespace smallnoise
