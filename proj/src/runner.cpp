#include "smallnoise/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "smallnoise/errors.hpp"
#include "smallnoise/estimate.hpp"
#include "smallnoise/experiments.hpp"
#include "smallnoise/rng.hpp"

namespace smallnoise {

using nlohmann::json;

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

namespace {

struct Assertion {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string detail;
};

json assertion_json(const Assertion& a) {
    json j;
    j["name"] = a.name;
    j["pass"] = a.pass;
    j["value"] = a.value;
    j["detail"] = a.detail;
    return j;
}

class ReportBuilder {
public:
    ReportBuilder(const std::string& subcommand, const RunConfig& config) {
        report_["subcommand"] = subcommand;
        report_["config"] = config_to_json(config);
    }

    json& results() { return report_["results"]; }

    void assert_that(const std::string& name, bool pass, double value,
                     const std::string& detail) {
        assertions_.push_back({name, pass, value, detail});
    }

    RunResult finish(std::vector<std::pair<std::string, std::string>> csv_files) {
        RunResult result;
        json list = json::array();
        bool all = true;
        for (const auto& a : assertions_) {
            list.push_back(assertion_json(a));
            all = all && a.pass;
            std::ostringstream line;
            line << (a.pass ? "PASS" : "FAIL") << "  " << a.name << " = "
                 << format_double(a.value) << "  (" << a.detail << ")";
            result.summary_lines.push_back(line.str());
        }
        report_["assertions"] = list;
        report_["pass"] = all;
        result.report = std::move(report_);
        result.csv_files = std::move(csv_files);
        result.passed = all;
        return result;
    }

private:
    json report_;
    std::vector<Assertion> assertions_;
};

std::string csv_content(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << format_double(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
    return out.str();
}

void require_seed(const RunConfig& config) {
    if (!config.seed_set)
        throw ConfigError("master_seed is required (there is no wall-clock default)");
}

ModelSpec validated_model(const RunConfig& config) {
    const ModelSpec spec = build_model(config.model);
    const auto checks =
        validate_model(spec, config.validation.lattice_density, config.validation.box);
    for (const auto& check : checks) {
        if (!check.pass)
            throw ValidationError("model validation failed: " + check.condition +
                                  " (worst ratio " + format_double(check.worst_value) + " at t=" +
                                  format_double(check.worst_t) + ", state=" +
                                  format_double(check.worst_state) + ")");
    }
    return spec;
}

json validation_json(const ModelSpec& spec, const RunConfig& config) {
    json list = json::array();
    for (const auto& check :
         validate_model(spec, config.validation.lattice_density, config.validation.box)) {
        json j;
        j["condition"] = check.condition;
        j["pass"] = check.pass;
        j["worst_ratio"] = check.worst_value;
        j["worst_t"] = check.worst_t;
        j["worst_state"] = check.worst_state;
        list.push_back(j);
    }
    return list;
}

json curve_json(const RiskCurve& curve) {
    json j;
    j["epsilons"] = curve.epsilons;
    j["bandwidths"] = curve.bandwidths;
    j["n_steps"] = curve.steps;
    j["risks"] = curve.risks;
    j["n_replicates"] = curve.n_replicates;
    j["fitted_slope"] = curve.fit.slope;
    j["fitted_intercept"] = curve.fit.intercept;
    j["slope_stderr"] = curve.fit.slope_stderr;
    j["theoretical_slope"] = curve.theoretical_slope;
    if (!curve.event_failure_freq.empty()) j["event_failure_freq"] = curve.event_failure_freq;
    return j;
}

std::vector<std::vector<double>> curve_rows(const RiskCurve& curve) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < curve.epsilons.size(); ++i) {
        std::vector<double> row{curve.epsilons[i], curve.bandwidths[i],
                                static_cast<double>(curve.steps[i]), curve.risks[i]};
        if (!curve.event_failure_freq.empty()) row.push_back(curve.event_failure_freq[i]);
        rows.push_back(row);
    }
    return rows;
}

RunResult run_rates(const RunConfig& config) {
    require_seed(config);
    const ModelSpec spec = validated_model(config);
    const Kernel kernel = build_kernel(config.kernel);
    ReportBuilder builder("rates", config);
    builder.results()["validation"] = validation_json(spec, config);

    if (!config.phi_list.empty()) {
        // noise-free bias sweep: risk against the bandwidth at epsilon = 0
        const long n_steps = config.n_steps > 0 ? config.n_steps : (1L << 17);
        const BiasSweep sweep = bias_sweep(spec, kernel, config.phi_list, config.eval_window,
                                           n_steps, config.n_threads);
        builder.results()["mode"] = "bias_sweep";
        builder.results()["bandwidths"] = sweep.bandwidths;
        builder.results()["risks"] = sweep.risks;
        builder.results()["fitted_slope"] = sweep.fit.slope;
        builder.results()["theoretical_slope"] = sweep.theoretical_slope;
        builder.results()["n_steps"] = sweep.n_steps;
        const double err = std::abs(sweep.fit.slope - sweep.theoretical_slope);
        builder.assert_that("bias_slope", err <= config.assertions.bias_slope_tolerance,
                            sweep.fit.slope,
                            "target " + format_double(sweep.theoretical_slope) + " +/- " +
                                format_double(config.assertions.bias_slope_tolerance));
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < sweep.bandwidths.size(); ++i)
            rows.push_back({sweep.bandwidths[i], sweep.risks[i]});
        return builder.finish({{"bias_sweep.csv", csv_content({"bandwidth", "risk"}, rows)}});
    }

    const RiskCurve curve =
        risk_curve_main(spec, kernel, config.eps_list, config.n_replicates, config.eval_window,
                        config.master_seed, policy_for(config), config.n_threads);
    builder.results()["mode"] = "risk_curve";
    builder.results()["curve"] = curve_json(curve);
    const double err = std::abs(curve.fit.slope - curve.theoretical_slope);
    builder.assert_that("rate_slope", err <= config.assertions.slope_tolerance, curve.fit.slope,
                        "target " + format_double(curve.theoretical_slope) + " +/- " +
                            format_double(config.assertions.slope_tolerance));
    return builder.finish({{"risk_curve.csv", csv_content({"epsilon", "bandwidth", "n_steps",
                                                           "risk"},
                                                          curve_rows(curve))}});
}

RunResult run_rates_alt(const RunConfig& config) {
    require_seed(config);
    const ModelSpec spec = validated_model(config);
    const Kernel kernel = build_kernel(config.kernel);
    ReportBuilder builder("rates-alt", config);
    builder.results()["validation"] = validation_json(spec, config);

    const RiskCurve curve =
        risk_curve_alt(spec, kernel, config.eps_list, config.n_replicates, config.eval_window,
                       config.master_seed, policy_for(config), config.n_threads);
    builder.results()["curve"] = curve_json(curve);
    const double err = std::abs(curve.fit.slope - curve.theoretical_slope);
    builder.assert_that("rate_slope", err <= config.assertions.alt_slope_tolerance,
                        curve.fit.slope,
                        "target " + format_double(curve.theoretical_slope) + " +/- " +
                            format_double(config.assertions.alt_slope_tolerance));
    const double worst_failure = curve.event_failure_freq.back();
    builder.assert_that("event_failure_freq", worst_failure <= config.assertions.event_failure_max,
                        worst_failure,
                        "threshold-event failures at the smallest epsilon, limit " +
                            format_double(config.assertions.event_failure_max));
    return builder.finish({{"risk_curve_alt.csv",
                            csv_content({"epsilon", "bandwidth", "n_steps", "risk",
                                         "event_failure_freq"},
                                        curve_rows(curve))}});
}

RunResult run_normality(const RunConfig& config) {
    require_seed(config);
    const ModelSpec spec = validated_model(config);
    const Kernel kernel = build_kernel(config.kernel);
    ReportBuilder builder("normality", config);
    builder.results()["validation"] = validation_json(spec, config);

    double t = config.eval_time;
    if (t < 0.0)
        t = 0.5 * (config.eval_window.a_frac + config.eval_window.b_frac) * spec.horizon;
    const DistributionCheck check =
        distribution_check(spec, kernel, config.epsilon, config.n_replicates, t,
                           config.master_seed, policy_for(config), config.n_threads);

    json& r = builder.results();
    r["t"] = check.t;
    r["epsilon"] = check.epsilon;
    r["bandwidth"] = check.bandwidth;
    r["alpha"] = check.alpha;
    r["bias_term"] = check.bias_term;
    r["nu"] = check.nu;
    r["g_squared"] = check.g_squared;
    r["reference_variance"] = check.reference_variance;
    r["empirical_variance"] = check.empirical_variance;
    r["variance_ratio"] = check.variance_ratio;
    r["ks_statistic"] = check.ks_statistic;
    r["ks_pvalue"] = check.ks_pvalue;
    r["sample_mean"] = check.sample_mean;
    r["n_steps"] = check.n_steps;
    r["n_replicates"] = config.n_replicates;

    builder.assert_that("variance_ratio",
                        std::abs(check.variance_ratio - 1.0) <=
                            config.assertions.variance_ratio_tolerance,
                        check.variance_ratio,
                        "reference nu int G^2 = " + format_double(check.reference_variance));
    builder.assert_that("ks_pvalue", check.ks_pvalue > config.assertions.ks_p_min,
                        check.ks_pvalue,
                        "KS against Normal(0, nu int G^2), minimum " +
                            format_double(config.assertions.ks_p_min));
    builder.assert_that("mean_within_3se", std::abs(check.sample_mean) <= check.mean_limit,
                        check.sample_mean, "limit " + format_double(check.mean_limit));

    std::vector<std::vector<double>> rows;
    for (double s : check.samples) rows.push_back({s});
    return builder.finish(
        {{"normality_samples.csv", csv_content({"standardized_statistic"}, rows)}});
}

RunResult run_lemma_check(const RunConfig& config) {
    require_seed(config);
    const ModelSpec spec = validated_model(config);
    ReportBuilder builder("lemma-check", config);
    builder.results()["validation"] = validation_json(spec, config);

    const SimPolicy policy = policy_for(config);
    const PathwiseBoundCheck pathwise =
        check_pathwise_bound(spec, config.epsilon, config.n_paths, config.master_seed, policy,
                             config.n_threads);
    json& r = builder.results();
    r["pathwise"]["epsilon"] = pathwise.epsilon;
    r["pathwise"]["n_paths"] = pathwise.n_paths;
    r["pathwise"]["delta"] = pathwise.delta;
    r["pathwise"]["violations"] = pathwise.violations;
    r["pathwise"]["samples"] = pathwise.samples;
    r["pathwise"]["worst_margin"] = pathwise.worst_margin;
    r["pathwise"]["n_steps"] = pathwise.n_steps;
    r["pathwise"]["note"] =
        "delta is an empirical discretization slack calibrated from the limit-path "
        "residuals, not part of the continuous-time inequality";
    builder.assert_that("pathwise_violations", pathwise.violations == 0,
                        static_cast<double>(pathwise.violations),
                        "delta = " + format_double(pathwise.delta));

    const L2ScalingCheck scaling =
        check_l2_scaling(spec, config.eps_list, config.n_replicates,
                         substream_seed(config.master_seed, 1000), policy, config.n_threads);
    r["l2"]["epsilons"] = scaling.epsilons;
    r["l2"]["sup_mean_sq"] = scaling.sup_mean_sq;
    r["l2"]["n_replicates"] = scaling.n_replicates;
    r["l2"]["fitted_exponent"] = scaling.fit.slope;
    r["l2"]["n_steps"] = scaling.n_steps;

    const bool closed_form = config.model.theta.descriptor.family == "constant" &&
                             config.model.theta.descriptor.params.at("c") == 0.0 &&
                             config.model.sigma1.family == "one" &&
                             config.model.sigma2.family == "one";
    if (closed_form) {
        // X - x = eps W, so sup_t E(X - x)^2 = eps^2 T exactly
        const double eps0 = scaling.epsilons.front();
        const double ratio = scaling.sup_mean_sq.front() / (eps0 * eps0 * spec.horizon);
        r["l2"]["closed_form_ratio"] = ratio;
        builder.assert_that("closed_form_ratio",
                            std::abs(ratio - 1.0) <= config.assertions.closed_form_tolerance,
                            ratio, "sup_t E(X-x)^2 / (eps^2 T), additive-noise closed form");
    }
    if (scaling.epsilons.size() >= 2) {
        builder.assert_that("l2_exponent",
                            std::abs(scaling.fit.slope - 2.0) <=
                                config.assertions.l2_slope_tolerance,
                            scaling.fit.slope,
                            "target 2 +/- " + format_double(config.assertions.l2_slope_tolerance));
    }

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < scaling.epsilons.size(); ++i)
        rows.push_back({scaling.epsilons[i], scaling.sup_mean_sq[i]});
    return builder.finish({{"l2_scaling.csv", csv_content({"epsilon", "sup_mean_sq"}, rows)}});
}

RunResult run_consistency(const RunConfig& config) {
    require_seed(config);
    const ModelSpec spec = validated_model(config);
    const Kernel kernel = build_kernel(config.kernel);
    ReportBuilder builder("consistency", config);
    builder.results()["validation"] = validation_json(spec, config);

    double exponent;
    if (config.bandwidth.rule == "main") {
        exponent = 1.0 / (spec.theta.smoothness.k + 2.0);
    } else if (config.bandwidth.rule == "power") {
        exponent = config.bandwidth.exponent;
    } else {
        throw ConfigError("consistency requires bandwidth rule 'main' or 'power'");
    }

    const ConsistencyReport sweep =
        consistency_sweep(spec, kernel, config.eps_list, exponent, config.n_replicates,
                          config.eval_window, config.master_seed, policy_for(config),
                          config.n_threads);
    json& r = builder.results();
    r["epsilons"] = sweep.epsilons;
    r["bandwidths"] = sweep.bandwidths;
    r["sup_risks"] = sweep.sup_risks;
    r["bandwidth_exponent"] = sweep.bandwidth_exponent;
    r["n_replicates"] = sweep.n_replicates;
    builder.assert_that("risk_monotone_decreasing", sweep.monotone_decreasing,
                        sweep.sup_risks.back(), "sup risk at the smallest epsilon");
    builder.assert_that("risk_decade_drop", sweep.decade_drop,
                        sweep.sup_risks.back() / sweep.sup_risks.front(),
                        "last/first sup risk, limit 0.1");

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < sweep.epsilons.size(); ++i)
        rows.push_back({sweep.epsilons[i], sweep.bandwidths[i], sweep.sup_risks[i]});
    return builder.finish(
        {{"consistency.csv", csv_content({"epsilon", "bandwidth", "sup_risk"}, rows)}});
}

RunResult run_kernel_info(const RunConfig& config) {
    const Kernel kernel = build_kernel(config.kernel);
    ReportBuilder builder("kernel-info", config);
    json& r = builder.results();
    r["family"] = kernel.family;
    r["order"] = kernel.order;
    r["support"] = {kernel.support_a, kernel.support_b};
    r["integral"] = kernel_moment(kernel, 0);
    r["g_squared"] = kernel_moment(kernel, 0, false, true);
    // first non-forced moment: drives the leading bias term
    r["moment_order_plus_1"] = kernel_moment(kernel, kernel.order + 1);
    json moments = json::array();
    for (int j = 0; j <= kernel.order + 1; ++j) moments.push_back(kernel_moment(kernel, j));
    r["moments"] = moments;
    builder.assert_that("unit_mass", std::abs(kernel_moment(kernel, 0) - 1.0) <= 1e-10,
                        kernel_moment(kernel, 0), "int G = 1 within 1e-10");
    bool vanishing = true;
    double worst = 0.0;
    for (int j = 1; j <= kernel.order; ++j) {
        const double m = std::abs(kernel_moment(kernel, j));
        worst = std::max(worst, m);
        vanishing = vanishing && m <= 1e-9;
    }
    builder.assert_that("vanishing_moments", vanishing, worst,
                        "max |int u^j G|, j = 1.." + std::to_string(kernel.order) +
                            ", within 1e-9");
    RunResult result = builder.finish({});
    auto brief = [](double v) {
        char buffer[32];
        std::snprintf(buffer, sizeof(buffer), "%.12g", v);
        return std::string(buffer);
    };
    std::ostringstream info;
    info << "kernel " << kernel.family << ": support [" << brief(kernel.support_a) << ", "
         << brief(kernel.support_b) << "], order " << kernel.order
         << ", int G^2 = " << brief(kernel_moment(kernel, 0, false, true)) << ", int u^"
         << kernel.order + 1 << " G = " << brief(kernel_moment(kernel, kernel.order + 1));
    result.summary_lines.insert(result.summary_lines.begin(), info.str());
    return result;
}

std::string path_csv(const Path& path, std::optional<int> replicate) {
    std::ostringstream out;
    out << (replicate ? "replicate,t,w,y,x\n" : "t,w,y,x\n");
    for (int i = 0; i <= path.grid.n_steps; ++i) {
        if (replicate) out << *replicate << ",";
        out << format_double(path.grid.time(i)) << "," << format_double(path.w[i]) << ","
            << format_double(path.y[i]) << "," << format_double(path.x[i]) << "\n";
    }
    return out.str();
}

RunResult run_simulate(const RunConfig& config) {
    require_seed(config);
    const ModelSpec spec = validated_model(config);
    ReportBuilder builder("simulate", config);
    builder.results()["validation"] = validation_json(spec, config);

    const SimPolicy policy = policy_for(config);
    const long n = policy.n_steps(spec.horizon, config.epsilon, 0.0);
    const PathGrid grid(spec.horizon, static_cast<int>(n));
    const Ensemble ensemble =
        simulate_ensemble(spec, grid, config.epsilon, config.n_paths, config.master_seed);

    json& r = builder.results();
    r["epsilon"] = config.epsilon;
    r["n_paths"] = config.n_paths;
    r["n_steps"] = n;
    json sups = json::array();
    for (const auto& path : ensemble.paths) sups.push_back(noise_sup_functional(path, spec));
    r["noise_sup"] = sups;
    builder.assert_that("paths_finite", true, static_cast<double>(config.n_paths),
                        "all paths completed without hitting the overflow guard");

    std::vector<std::pair<std::string, std::string>> files;
    if (config.output.split_paths) {
        for (int i = 0; i < config.n_paths; ++i)
            files.emplace_back("path_" + std::to_string(i) + ".csv",
                               path_csv(ensemble.paths[i], std::nullopt));
    } else {
        std::ostringstream out;
        out << "replicate,t,w,y,x\n";
        for (int i = 0; i < config.n_paths; ++i) {
            const auto& path = ensemble.paths[i];
            for (int k = 0; k <= path.grid.n_steps; ++k)
                out << i << "," << format_double(path.grid.time(k)) << ","
                    << format_double(path.w[k]) << "," << format_double(path.y[k]) << ","
                    << format_double(path.x[k]) << "\n";
        }
        files.emplace_back("paths.csv", out.str());
    }
    return builder.finish(std::move(files));
}

Path load_path_csv(const std::string& file, double epsilon) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open path file '" + file + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("path file '" + file + "' is empty");
    const bool with_replicate = line.rfind("replicate,", 0) == 0;
    if (line != "t,w,y,x" && line != "replicate,t,w,y,x")
        throw ConfigError("path file '" + file + "' must have header t,w,y,x");
    std::vector<double> t, w, y, x;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        const std::size_t offset = with_replicate ? 1 : 0;
        if (values.size() != offset + 4)
            throw ConfigError("malformed row in path file '" + file + "'");
        if (with_replicate && values[0] != 0) break;  // first replicate only
        t.push_back(values[offset]);
        w.push_back(values[offset + 1]);
        y.push_back(values[offset + 2]);
        x.push_back(values[offset + 3]);
    }
    if (t.size() < 2) throw ConfigError("path file '" + file + "' has fewer than two samples");
    Path path;
    path.grid = PathGrid(t.back(), static_cast<int>(t.size()) - 1);
    path.w = std::move(w);
    path.y = std::move(y);
    path.x = std::move(x);
    path.epsilon = epsilon;
    return path;
}

RunResult run_estimate(const RunConfig& config) {
    const ModelSpec spec = validated_model(config);
    const Kernel kernel = build_kernel(config.kernel);
    ReportBuilder builder("estimate", config);
    builder.results()["validation"] = validation_json(spec, config);

    Path path;
    if (config.path_file) {
        path = load_path_csv(*config.path_file, config.epsilon);
    } else {
        require_seed(config);
        const SimPolicy policy = policy_for(config);
        const long n = policy.n_steps(spec.horizon, config.epsilon, 0.0);
        path = simulate_path(spec, PathGrid(spec.horizon, static_cast<int>(n)), config.epsilon,
                             config.master_seed);
    }

    const double bandwidth = bandwidth_for(config, spec, config.epsilon);
    const EstimatorKind kind =
        config.estimator == "alternate" ? EstimatorKind::alternate : EstimatorKind::main;
    const std::vector<double> eval_times = config.eval_window.lattice(spec.horizon);
    const EstimateSeries series =
        estimate_series(path, spec, kernel, bandwidth, eval_times, kind);

    json& r = builder.results();
    r["bandwidth"] = bandwidth;
    r["estimator"] = config.estimator;
    r["n_steps"] = path.grid.n_steps;
    builder.assert_that("series_evaluated", true,
                        static_cast<double>(series.eval_times.size()),
                        "evaluation points inside the interior window");

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < series.eval_times.size(); ++i) {
        const double t = series.eval_times[i];
        rows.push_back({t, series.j_hat[i], series.theta_hat[i], spec.theta(t),
                        limit_path_value(spec, t)});
    }
    return builder.finish({{"estimate.csv",
                            csv_content({"t", "j_hat", "theta_hat", "theta_true", "x_limit"},
                                        rows)}});
}

}  // namespace

RunResult run_subcommand(const std::string& subcommand, const RunConfig& config) {
    if (subcommand == "simulate") return run_simulate(config);
    if (subcommand == "estimate") return run_estimate(config);
    if (subcommand == "rates") return run_rates(config);
    if (subcommand == "rates-alt") return run_rates_alt(config);
    if (subcommand == "normality") return run_normality(config);
    if (subcommand == "lemma-check") return run_lemma_check(config);
    if (subcommand == "consistency") return run_consistency(config);
    if (subcommand == "kernel-info") return run_kernel_info(config);
    throw ConfigError("unknown subcommand '" + subcommand + "'");
}

void write_run_result(const std::string& out_dir, const RunResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "data");
    {
        std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
        out << canonical_dump(result.report);
    }
    for (const auto& [name, content] : result.csv_files) {
        std::ofstream out(fs::path(out_dir) / "data" / name, std::ios::binary);
        out << content;
    }
}

}  // namespace smallnoise
