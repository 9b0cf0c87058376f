#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "microelast/decomposition.hpp"
#include "microelast/sampling.hpp"

namespace microelast {

/// Model abstraction for evaluation: composed scaled outputs and
/// input-Jacobians at physical points.
using Predictor = std::function<BatchEval(const Matrix& x_physical)>;

struct GridStats {
    double mean = 0, max = 0, min = 0;
};
GridStats grid_stats(const Vector& grid);

/// Pointwise residual fields on a regular evaluation grid, in physical
/// units, plus the scaled work-balance norm.
struct ResidualReport {
    int n_per_side = 0;
    Matrix points;  // physical, 2 x n
    Vector r_div_x, r_div_y;                    // N/mm^3
    Vector r_const_xx, r_const_yy, r_const_xy;  // MPa
    Vector r_total;                             // absolute sum
    GridStats div_x, div_y, const_xx, const_yy, const_xy, total;
    double work_norm = 0;  // sqrt(L_W) on the evaluation grid
};

ResidualReport residual_report(const Predictor& model,
                               const MaterialField& material,
                               const ScaleSet& scales, double edge_length,
                               int n_per_side);

/// Per-candidate squared scaled residual sums (work term excluded);
/// the adaptive scoring rule expressed through a Predictor.
Vector score_candidates(const Predictor& model, const Matrix& candidates,
                        const MaterialField& material, const ScaleSet& scales);

enum class Method { pinn, cpinn, ada_pinn, ada_cpinn };
std::string to_string(Method m);

/// Largest units-per-layer such that `n_subnets` copies of the network
/// stay within the total parameter budget.
int units_for_budget(std::int64_t budget, int n_layers, int n_subnets);

struct StudyConfig {
    double edge_length = 2.0;
    double sigma_bar = 0.025;
    bool corrected_shear = false;
    std::int64_t param_budget = 13000;
    int n_layers = 4;
    int fixed_units = 0;  // > 0: bypass budget sizing
    Activation activation = Activation::swish;
    std::vector<int> budgets;  // training grid sides (convergence study)
    std::vector<int> splits;   // n for an n x n split (split study)
    std::pair<int, int> cpinn_split = {2, 2};
    int train_side = 32;  // split-study training grid side
    int eval_side = 128;
    BfgsOptions bfgs;
    double psi = 20.0;
    bool interface_full = false;
    std::uint64_t seed = 0;
    AdaptiveConfig adaptive;  // ada_* methods
};

/// One trained model, either a single network or a decomposition.
struct TrainedModel {
    Method method = Method::pinn;
    Topology topology;  // per-subnet
    std::shared_ptr<PinnProblem> pinn;
    std::shared_ptr<CpinnProblem> cpinn;
    Vector theta;  // flat parameters (concatenated for cpinn)
    OptHistory history;
    double final_loss = 0;

    Predictor predictor() const;
};

/// Train one model of the given method on a regular training grid of
/// side `train_side`, sized to the study's parameter budget.
TrainedModel train_model(Method method, const StudyConfig& config,
                         const MaterialField& material, int train_side);

struct StudyRow {
    int key = 0;  // grid side (convergence) or split count (split)
    double mean_r = 0;
    bool ok = false;
    std::string error;
};

struct StudyResult {
    Method method = Method::pinn;
    std::int64_t param_budget = 0;
    std::uint64_t seed = 0;
    int eval_side = 0;
    std::vector<StudyRow> rows;
};

/// Mean residual R over the evaluation grid versus training budget;
/// individual run failures are recorded and the study continues.
StudyResult convergence_study(const StudyConfig& config, Method method,
                              const MaterialField& material);

/// Mean residual R versus n x n decomposition at fixed budget.
StudyResult split_study(const StudyConfig& config,
                        const MaterialField& material);

}  // namespace microelast
