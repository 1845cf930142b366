#include "smallnoise/config.hpp"

#include <fstream>

#include "smallnoise/errors.hpp"

namespace smallnoise {

using nlohmann::json;

namespace {

json descriptor_to_json(const Descriptor& desc) {
    json j;
    j["family"] = desc.family;
    for (const auto& [key, value] : desc.params) j[key] = value;
    for (const auto& [key, value] : desc.arrays) j[key] = value;
    return j;
}

Descriptor descriptor_from_json(const json& j, const std::string& context) {
    if (!j.is_object() || !j.contains("family"))
        throw ConfigError(context + ": expected an object with a 'family' field");
    Descriptor desc;
    desc.family = j.at("family").get<std::string>();
    for (const auto& [key, value] : j.items()) {
        if (key == "family") continue;
        if (value.is_number()) {
            desc.params[key] = value.get<double>();
        } else if (value.is_array()) {
            desc.arrays[key] = value.get<std::vector<double>>();
        } else {
            throw ConfigError(context + "." + key + ": expected a number or an array");
        }
    }
    return desc;
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

}  // namespace

json config_to_json(const RunConfig& c) {
    json j;
    json theta = descriptor_to_json(c.model.theta.descriptor);
    if (c.model.theta.bound_L > 0.0) theta["L"] = c.model.theta.bound_L;
    json smooth;
    smooth["k"] = c.model.theta.smoothness.k;
    if (c.model.theta.smoothness.holder_gamma)
        smooth["gamma"] = *c.model.theta.smoothness.holder_gamma;
    theta["smoothness"] = smooth;
    j["model"]["theta"] = theta;
    j["model"]["sigma1"] = descriptor_to_json(c.model.sigma1);
    j["model"]["sigma2"] = descriptor_to_json(c.model.sigma2);
    j["model"]["y"] = descriptor_to_json(c.model.y);
    j["model"]["x0"] = c.model.x0;
    j["model"]["T"] = c.model.horizon;
    j["model"]["growth_K"] = c.model.growth_K;
    j["model"]["sigma2_bound"] = c.model.sigma2_bound;

    j["kernel"]["family"] = c.kernel.family;
    if (c.kernel.order) j["kernel"]["order"] = *c.kernel.order;
    j["estimator"] = c.estimator;
    j["bandwidth"]["rule"] = c.bandwidth.rule;
    j["bandwidth"]["exponent"] = c.bandwidth.exponent;
    j["bandwidth"]["value"] = c.bandwidth.value;
    j["eps_list"] = c.eps_list;
    j["epsilon"] = c.epsilon;
    if (!c.phi_list.empty()) j["phi_list"] = c.phi_list;
    j["n_replicates"] = c.n_replicates;
    j["n_paths"] = c.n_paths;
    j["eval_window"]["a_frac"] = c.eval_window.a_frac;
    j["eval_window"]["b_frac"] = c.eval_window.b_frac;
    j["eval_window"]["points"] = c.eval_window.points;
    j["eval_time"] = c.eval_time;
    if (c.seed_set) j["master_seed"] = c.master_seed;
    j["grid"]["n_steps"] = c.n_steps;
    j["grid"]["steps_per_unit"] = c.steps_per_unit;
    j["grid"]["dt_scale"] = c.dt_scale;
    j["n_threads"] = c.n_threads;
    if (c.path_file) j["path_file"] = *c.path_file;
    j["output"]["dir"] = c.output.dir;
    j["output"]["split_paths"] = c.output.split_paths;
    j["validation"]["lattice_density"] = c.validation.lattice_density;
    j["validation"]["x_range"] = {c.validation.box.x_lo, c.validation.box.x_hi};
    j["validation"]["y_range"] = {c.validation.box.y_lo, c.validation.box.y_hi};
    j["assertions"]["slope_tolerance"] = c.assertions.slope_tolerance;
    j["assertions"]["alt_slope_tolerance"] = c.assertions.alt_slope_tolerance;
    j["assertions"]["bias_slope_tolerance"] = c.assertions.bias_slope_tolerance;
    j["assertions"]["l2_slope_tolerance"] = c.assertions.l2_slope_tolerance;
    j["assertions"]["closed_form_tolerance"] = c.assertions.closed_form_tolerance;
    j["assertions"]["variance_ratio_tolerance"] = c.assertions.variance_ratio_tolerance;
    j["assertions"]["ks_p_min"] = c.assertions.ks_p_min;
    j["assertions"]["event_failure_max"] = c.assertions.event_failure_max;
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    if (j.contains("model")) {
        const json& m = j.at("model");
        if (m.contains("theta")) {
            json theta = m.at("theta");
            if (theta.contains("smoothness")) {
                const json& s = theta.at("smoothness");
                c.model.theta.smoothness.k = get_or<int>(s, "k", 1);
                if (s.contains("gamma"))
                    c.model.theta.smoothness.holder_gamma = s.at("gamma").get<double>();
                theta.erase("smoothness");
            }
            if (theta.contains("L")) {
                c.model.theta.bound_L = theta.at("L").get<double>();
                theta.erase("L");
            }
            c.model.theta.descriptor = descriptor_from_json(theta, "model.theta");
        }
        if (m.contains("sigma1"))
            c.model.sigma1 = descriptor_from_json(m.at("sigma1"), "model.sigma1");
        if (m.contains("sigma2"))
            c.model.sigma2 = descriptor_from_json(m.at("sigma2"), "model.sigma2");
        if (m.contains("y")) c.model.y = descriptor_from_json(m.at("y"), "model.y");
        c.model.x0 = get_or<double>(m, "x0", c.model.x0);
        c.model.horizon = get_or<double>(m, "T", c.model.horizon);
        c.model.growth_K = get_or<double>(m, "growth_K", c.model.growth_K);
        c.model.sigma2_bound = get_or<double>(m, "sigma2_bound", c.model.sigma2_bound);
    }
    if (j.contains("kernel")) {
        const json& k = j.at("kernel");
        c.kernel.family = get_or<std::string>(k, "family", c.kernel.family);
        if (k.contains("order")) c.kernel.order = k.at("order").get<int>();
    }
    c.estimator = get_or<std::string>(j, "estimator", c.estimator);
    if (c.estimator != "main" && c.estimator != "alternate")
        throw ConfigError("estimator must be 'main' or 'alternate'");
    if (j.contains("bandwidth")) {
        const json& b = j.at("bandwidth");
        c.bandwidth.rule = get_or<std::string>(b, "rule", c.bandwidth.rule);
        c.bandwidth.exponent = get_or<double>(b, "exponent", c.bandwidth.exponent);
        c.bandwidth.value = get_or<double>(b, "value", c.bandwidth.value);
    }
    c.eps_list = get_or<std::vector<double>>(j, "eps_list", c.eps_list);
    c.epsilon = get_or<double>(j, "epsilon", c.epsilon);
    c.phi_list = get_or<std::vector<double>>(j, "phi_list", c.phi_list);
    c.n_replicates = get_or<int>(j, "n_replicates", c.n_replicates);
    c.n_paths = get_or<int>(j, "n_paths", c.n_paths);
    if (j.contains("eval_window")) {
        const json& w = j.at("eval_window");
        c.eval_window.a_frac = get_or<double>(w, "a_frac", c.eval_window.a_frac);
        c.eval_window.b_frac = get_or<double>(w, "b_frac", c.eval_window.b_frac);
        c.eval_window.points = get_or<int>(w, "points", c.eval_window.points);
    }
    c.eval_time = get_or<double>(j, "eval_time", c.eval_time);
    if (j.contains("master_seed")) {
        c.master_seed = j.at("master_seed").get<std::uint64_t>();
        c.seed_set = true;
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        c.n_steps = get_or<long>(g, "n_steps", c.n_steps);
        c.steps_per_unit = get_or<int>(g, "steps_per_unit", c.steps_per_unit);
        c.dt_scale = get_or<double>(g, "dt_scale", c.dt_scale);
    }
    c.n_threads = get_or<int>(j, "n_threads", c.n_threads);
    if (j.contains("path_file")) c.path_file = j.at("path_file").get<std::string>();
    if (j.contains("output")) {
        const json& o = j.at("output");
        c.output.dir = get_or<std::string>(o, "dir", c.output.dir);
        c.output.split_paths = get_or<bool>(o, "split_paths", c.output.split_paths);
    }
    if (j.contains("validation")) {
        const json& v = j.at("validation");
        c.validation.lattice_density = get_or<int>(v, "lattice_density", 256);
        if (v.contains("x_range")) {
            const auto range = v.at("x_range").get<std::vector<double>>();
            if (range.size() != 2) throw ConfigError("validation.x_range must have two entries");
            c.validation.box.x_lo = range[0];
            c.validation.box.x_hi = range[1];
        }
        if (v.contains("y_range")) {
            const auto range = v.at("y_range").get<std::vector<double>>();
            if (range.size() != 2) throw ConfigError("validation.y_range must have two entries");
            c.validation.box.y_lo = range[0];
            c.validation.box.y_hi = range[1];
        }
    }
    if (j.contains("assertions")) {
        const json& a = j.at("assertions");
        auto& t = c.assertions;
        t.slope_tolerance = get_or<double>(a, "slope_tolerance", t.slope_tolerance);
        t.alt_slope_tolerance = get_or<double>(a, "alt_slope_tolerance", t.alt_slope_tolerance);
        t.bias_slope_tolerance = get_or<double>(a, "bias_slope_tolerance", t.bias_slope_tolerance);
        t.l2_slope_tolerance = get_or<double>(a, "l2_slope_tolerance", t.l2_slope_tolerance);
        t.closed_form_tolerance =
            get_or<double>(a, "closed_form_tolerance", t.closed_form_tolerance);
        t.variance_ratio_tolerance =
            get_or<double>(a, "variance_ratio_tolerance", t.variance_ratio_tolerance);
        t.ks_p_min = get_or<double>(a, "ks_p_min", t.ks_p_min);
        t.event_failure_max = get_or<double>(a, "event_failure_max", t.event_failure_max);
    }
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    for (auto& ch : key)
        if (ch == '.') ch = '/';
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    doc[json::json_pointer("/" + key)] = value;
}

ModelSpec build_model(const ModelConfig& config) {
    ModelSpec spec;
    if (!(config.horizon > 0.0)) throw ConfigError("model.T must be positive");
    spec.horizon = config.horizon;
    spec.x0 = config.x0;
    spec.growth_K = config.growth_K;
    spec.sigma2_bound = config.sigma2_bound;
    if (!(spec.growth_K > 0.0)) throw ConfigError("model.growth_K must be positive");
    if (!(spec.sigma2_bound > 0.0)) throw ConfigError("model.sigma2_bound must be positive");
    spec.theta = make_multiplier(config.theta.descriptor, config.theta.bound_L,
                                 config.theta.smoothness, config.horizon);
    spec.sigma1 = make_sigma1(config.sigma1);
    spec.sigma2 = make_sigma2(config.sigma2);
    check_y_descriptor(config.y);
    spec.y_dynamics = config.y;
    return spec;
}

Kernel build_kernel(const KernelConfig& config) {
    return make_kernel(config.family, config.order);
}

double bandwidth_for(const RunConfig& config, const ModelSpec& spec, double epsilon) {
    const auto& rule = config.bandwidth.rule;
    if (rule == "main") return bandwidth_main(epsilon, spec.theta.smoothness.k);
    if (rule == "alt") return bandwidth_alt(epsilon, spec.theta.smoothness.rho());
    if (rule == "power") {
        if (!(config.bandwidth.exponent > 0.0) || !(config.bandwidth.exponent < 1.0))
            throw ConfigError("bandwidth.exponent must lie in (0, 1)");
        return std::pow(epsilon, config.bandwidth.exponent);
    }
    if (rule == "fixed") {
        if (!(config.bandwidth.value > 0.0)) throw ConfigError("bandwidth.value must be positive");
        return config.bandwidth.value;
    }
    throw ConfigError("unknown bandwidth rule '" + rule + "'");
}

SimPolicy policy_for(const RunConfig& config) {
    SimPolicy policy;
    policy.steps_per_unit = config.steps_per_unit;
    policy.dt_scale = config.dt_scale;
    if (config.n_steps > 0) policy.n_steps_override = config.n_steps;
    return policy;
}

}  // namespace smallnoise
