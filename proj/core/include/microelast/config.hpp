#pragma once

#include <string>

#include "microelast/evaluation.hpp"

namespace microelast {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a required key is absent; the CLI maps this to exit
/// code 2.
struct MissingKeyError : ConfigError {
    explicit MissingKeyError(const std::string& key)
        : ConfigError("config: missing required key '" + key + "'"),
          key(key) {}
    std::string key;
};

enum class ProblemKind { homogeneous, single_inclusion, voxel };
std::string to_string(ProblemKind k);

struct SamplingConfig {
    std::string mode = "regular";  // regular | adaptive
    int n_per_side = 32;
    AdaptiveConfig adaptive;
};

struct MaterialConfig {
    std::string kind = "constants";  // constants | tanh | image
    EngineeringConstants matrix{1.0e4, 0.4};
    EngineeringConstants inclusion{1.0e4, 0.4};
    double radius = 0.4;  // tanh kind
    double delta = 0.01;
    std::string image_path;  // image kind; empty: synthetic fixture
    double sigma_px = 1.0;
    double threshold = 0.5;
    int fit_iters = 2000;
};

struct StudySettings {
    std::vector<int> budgets{16, 32};
    std::vector<int> splits{1, 2};
    int train_side = 32;
    std::int64_t param_budget = 13000;
};

/// Schema-validated experiment description. Unknown keys are rejected;
/// the keys `problem`, `method`, `seed`, and `out_dir` are required,
/// everything else falls back to defaults.
struct ExperimentConfig {
    ProblemKind problem = ProblemKind::homogeneous;
    Method method = Method::pinn;
    int n_layers = 4;
    int units_per_layer = 64;
    std::string activation = "swish";
    std::pair<int, int> split{2, 2};
    double psi = 20.0;
    bool interface_full = false;
    bool corrected_shear = false;
    double edge_length = 2.0;  // mm
    double sigma_bar = 0.025;  // MPa
    SamplingConfig sampling;
    BfgsOptions optimizer;
    MaterialConfig material;
    StudySettings study;
    int eval_side = 64;
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    Activation activation_enum() const;
    void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace microelast
