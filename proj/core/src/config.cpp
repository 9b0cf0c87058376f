#include "microelast/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace microelast {

using Json = nlohmann::ordered_json;

namespace {

void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("config: unknown key '" + ctx + key + "'");
    }
}

const Json& require(const Json& obj, const char* key, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end()) throw MissingKeyError(ctx + key);
    return *it;
}

template <typename T>
T get_or(const Json& obj, const char* key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return it->get<T>();
}

ProblemKind problem_from_string(const std::string& s) {
    if (s == "homogeneous") return ProblemKind::homogeneous;
    if (s == "single_inclusion") return ProblemKind::single_inclusion;
    if (s == "voxel") return ProblemKind::voxel;
    throw ConfigError("config: unknown problem '" + s + "'");
}

Method method_from_string(const std::string& s) {
    if (s == "pinn") return Method::pinn;
    if (s == "cpinn") return Method::cpinn;
    if (s == "ada_pinn") return Method::ada_pinn;
    if (s == "ada_cpinn") return Method::ada_cpinn;
    throw ConfigError("config: unknown method '" + s + "'");
}

SamplingConfig parse_sampling(const Json& obj) {
    check_keys(obj, {"mode", "n_per_side", "adaptive"}, "sampling.");
    SamplingConfig s;
    s.mode = get_or<std::string>(obj, "mode", s.mode);
    if (s.mode != "regular" && s.mode != "adaptive")
        throw ConfigError("config: unknown sampling mode '" + s.mode + "'");
    s.n_per_side = get_or(obj, "n_per_side", s.n_per_side);
    if (auto it = obj.find("adaptive"); it != obj.end()) {
        const Json& a = *it;
        check_keys(a,
                   {"n_fine", "n_iter", "cycle_iters", "n_reg", "n_rand",
                    "n_ada", "gamma", "alpha", "seed"},
                   "sampling.adaptive.");
        s.adaptive.n_fine = get_or(a, "n_fine", s.adaptive.n_fine);
        s.adaptive.n_iter = get_or(a, "n_iter", s.adaptive.n_iter);
        s.adaptive.cycle_iters = get_or(a, "cycle_iters",
                                        s.adaptive.cycle_iters);
        s.adaptive.n_reg = get_or(a, "n_reg", s.adaptive.n_reg);
        s.adaptive.n_rand = get_or(a, "n_rand", s.adaptive.n_rand);
        s.adaptive.n_ada = get_or(a, "n_ada", s.adaptive.n_ada);
        s.adaptive.gamma = get_or(a, "gamma", s.adaptive.gamma);
        s.adaptive.alpha = get_or(a, "alpha", s.adaptive.alpha);
        s.adaptive.seed = get_or(a, "seed", s.adaptive.seed);
    }
    return s;
}

MaterialConfig parse_material(const Json& obj) {
    check_keys(obj,
               {"kind", "matrix", "inclusion", "radius", "delta", "image_path",
                "sigma_px", "threshold", "fit_iters"},
               "material.");
    MaterialConfig m;
    m.kind = get_or<std::string>(obj, "kind", m.kind);
    if (m.kind != "constants" && m.kind != "tanh" && m.kind != "image")
        throw ConfigError("config: unknown material kind '" + m.kind + "'");
    auto phase = [](const Json& p, const std::string& ctx) {
        check_keys(p, {"youngs_modulus", "poisson_ratio"}, ctx);
        return EngineeringConstants{
            require(p, "youngs_modulus", ctx).get<double>(),
            require(p, "poisson_ratio", ctx).get<double>()};
    };
    if (auto it = obj.find("matrix"); it != obj.end())
        m.matrix = phase(*it, "material.matrix.");
    if (auto it = obj.find("inclusion"); it != obj.end())
        m.inclusion = phase(*it, "material.inclusion.");
    m.radius = get_or(obj, "radius", m.radius);
    m.delta = get_or(obj, "delta", m.delta);
    m.image_path = get_or<std::string>(obj, "image_path", m.image_path);
    m.sigma_px = get_or(obj, "sigma_px", m.sigma_px);
    m.threshold = get_or(obj, "threshold", m.threshold);
    m.fit_iters = get_or(obj, "fit_iters", m.fit_iters);
    return m;
}

}  // namespace

std::string to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::homogeneous: return "homogeneous";
        case ProblemKind::single_inclusion: return "single_inclusion";
        case ProblemKind::voxel: return "voxel";
    }
    return "unknown";
}

Activation ExperimentConfig::activation_enum() const {
    if (activation == "swish") return Activation::swish;
    if (activation == "sigmoid") return Activation::sigmoid;
    if (activation == "tanh") return Activation::tanh;
    throw ConfigError("config: unknown activation '" + activation + "'");
}

void ExperimentConfig::validate() const {
    (void)activation_enum();
    if (n_layers < 1 || units_per_layer < 1)
        throw ConfigError("config: topology dims must be positive");
    if (split.first < 1 || split.second < 1)
        throw ConfigError("config: split counts must be >= 1");
    if (edge_length <= 0.0 || sigma_bar <= 0.0)
        throw ConfigError("config: edge_length and sigma_bar must be > 0");
    if (sampling.n_per_side < 2)
        throw ConfigError("config: sampling.n_per_side >= 2");
    if (eval_side < 2) throw ConfigError("config: eval_side >= 2");
    if (sampling.mode == "adaptive") sampling.adaptive.validate();
}

ExperimentConfig parse_config(const std::string& json_text) {
    Json root;
    try {
        root = Json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object())
        throw ConfigError("config: top level must be an object");
    check_keys(root,
               {"problem", "method", "topology", "split", "psi",
                "interface_full", "corrected_shear", "edge_length",
                "sigma_bar", "sampling", "optimizer", "material", "study",
                "eval_side", "out_dir", "seed"},
               "");

    ExperimentConfig c;
    c.problem =
        problem_from_string(require(root, "problem", "").get<std::string>());
    c.method =
        method_from_string(require(root, "method", "").get<std::string>());
    c.seed = require(root, "seed", "").get<std::uint64_t>();
    c.out_dir = require(root, "out_dir", "").get<std::string>();

    if (auto it = root.find("topology"); it != root.end()) {
        check_keys(*it, {"n_layers", "units_per_layer", "activation"},
                   "topology.");
        c.n_layers = get_or(*it, "n_layers", c.n_layers);
        c.units_per_layer =
            get_or(*it, "units_per_layer", c.units_per_layer);
        c.activation = get_or<std::string>(*it, "activation", c.activation);
    }
    if (auto it = root.find("split"); it != root.end()) {
        check_keys(*it, {"nx", "ny"}, "split.");
        c.split.first = get_or(*it, "nx", c.split.first);
        c.split.second = get_or(*it, "ny", c.split.second);
    }
    c.psi = get_or(root, "psi", c.psi);
    c.interface_full = get_or(root, "interface_full", c.interface_full);
    c.corrected_shear = get_or(root, "corrected_shear", c.corrected_shear);
    c.edge_length = get_or(root, "edge_length", c.edge_length);
    c.sigma_bar = get_or(root, "sigma_bar", c.sigma_bar);
    if (auto it = root.find("sampling"); it != root.end())
        c.sampling = parse_sampling(*it);
    if (auto it = root.find("optimizer"); it != root.end()) {
        check_keys(*it,
                   {"max_iters", "grad_tol", "step_tol", "wolfe_c1",
                    "wolfe_c2"},
                   "optimizer.");
        c.optimizer.max_iters = get_or(*it, "max_iters",
                                       c.optimizer.max_iters);
        c.optimizer.grad_tol = get_or(*it, "grad_tol", c.optimizer.grad_tol);
        c.optimizer.step_tol = get_or(*it, "step_tol", c.optimizer.step_tol);
        c.optimizer.wolfe_c1 = get_or(*it, "wolfe_c1", c.optimizer.wolfe_c1);
        c.optimizer.wolfe_c2 = get_or(*it, "wolfe_c2", c.optimizer.wolfe_c2);
    }
    if (auto it = root.find("material"); it != root.end())
        c.material = parse_material(*it);
    if (auto it = root.find("study"); it != root.end()) {
        check_keys(*it, {"budgets", "splits", "train_side", "param_budget"},
                   "study.");
        c.study.budgets = get_or(*it, "budgets", c.study.budgets);
        c.study.splits = get_or(*it, "splits", c.study.splits);
        c.study.train_side = get_or(*it, "train_side", c.study.train_side);
        c.study.param_budget =
            get_or(*it, "param_budget", c.study.param_budget);
    }
    c.eval_side = get_or(root, "eval_side", c.eval_side);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) {
    Json root;
    root["problem"] = to_string(config.problem);
    root["method"] = to_string(config.method);
    root["topology"] = {{"n_layers", config.n_layers},
                        {"units_per_layer", config.units_per_layer},
                        {"activation", config.activation}};
    root["split"] = {{"nx", config.split.first}, {"ny", config.split.second}};
    root["psi"] = config.psi;
    root["interface_full"] = config.interface_full;
    root["corrected_shear"] = config.corrected_shear;
    root["edge_length"] = config.edge_length;
    root["sigma_bar"] = config.sigma_bar;
    root["sampling"] = {
        {"mode", config.sampling.mode},
        {"n_per_side", config.sampling.n_per_side},
        {"adaptive",
         {{"n_fine", config.sampling.adaptive.n_fine},
          {"n_iter", config.sampling.adaptive.n_iter},
          {"cycle_iters", config.sampling.adaptive.cycle_iters},
          {"n_reg", config.sampling.adaptive.n_reg},
          {"n_rand", config.sampling.adaptive.n_rand},
          {"n_ada", config.sampling.adaptive.n_ada},
          {"gamma", config.sampling.adaptive.gamma},
          {"alpha", config.sampling.adaptive.alpha},
          {"seed", config.sampling.adaptive.seed}}}};
    root["optimizer"] = {{"max_iters", config.optimizer.max_iters},
                         {"grad_tol", config.optimizer.grad_tol},
                         {"step_tol", config.optimizer.step_tol},
                         {"wolfe_c1", config.optimizer.wolfe_c1},
                         {"wolfe_c2", config.optimizer.wolfe_c2}};
    root["material"] = {
        {"kind", config.material.kind},
        {"matrix",
         {{"youngs_modulus", config.material.matrix.youngs_modulus},
          {"poisson_ratio", config.material.matrix.poisson_ratio}}},
        {"inclusion",
         {{"youngs_modulus", config.material.inclusion.youngs_modulus},
          {"poisson_ratio", config.material.inclusion.poisson_ratio}}},
        {"radius", config.material.radius},
        {"delta", config.material.delta},
        {"image_path", config.material.image_path},
        {"sigma_px", config.material.sigma_px},
        {"threshold", config.material.threshold},
        {"fit_iters", config.material.fit_iters}};
    root["study"] = {{"budgets", config.study.budgets},
                     {"splits", config.study.splits},
                     {"train_side", config.study.train_side},
                     {"param_budget", config.study.param_budget}};
    root["eval_side"] = config.eval_side;
    root["out_dir"] = config.out_dir;
    root["seed"] = config.seed;
    return root.dump(2) + "\n";
}

}  // namespace microelast
