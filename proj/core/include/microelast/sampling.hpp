#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "microelast/elasticity.hpp"
#include "microelast/optimizer.hpp"

namespace microelast {

enum class Provenance { regular, random, adaptive, combined };

enum class EdgeLabel : int { left = 0, right = 1, bottom = 2, top = 3 };

/// Collocation points in physical coordinates (mm).
struct CollocationSet {
    Matrix interior;  // 2 x n_d
    Matrix boundary;  // 2 x n_b
    std::vector<EdgeLabel> boundary_edges;
    Provenance provenance = Provenance::regular;
};

/// n_per_side^2 interior points, inclusive of the edges at +-L/2,
/// x-major order.
CollocationSet regular_grid(int n_per_side, double edge_length);

/// i.i.d. uniform interior points on the open square.
CollocationSet uniform_random(int n, double edge_length, std::uint64_t seed);

/// n_b uniformly spaced points on the traction-loaded right edge
/// (endpoints included).
Matrix loaded_edge_points(int n_b, double edge_length);

/// Indices of the n_ada candidates with the largest pointwise loss;
/// ties broken by lower index.
std::vector<Eigen::Index> select_adaptive(const Vector& pointwise_loss,
                                          int n_ada);

/// Concatenation of regular and adaptive interior points (duplicates
/// permitted).
Matrix combine_points(const Matrix& regular, const Matrix& adaptive);

struct AdaptiveConfig {
    int n_fine = 200;       // BFGS iterations of the fine-grid phase
    int n_iter = 1;         // adaptive cycles
    int cycle_iters = 200;  // BFGS iterations per cycle
    int n_reg = 0;          // sparse regular points per cycle (side^2)
    int n_rand = 0;         // random candidates per cycle
    int n_ada = 0;          // selected points per cycle
    double gamma = 0.0;     // n_reg / n_ada (consistency-checked)
    double alpha = 1.0;     // gradient clip threshold during cycles
    std::uint64_t seed = 0;

    void validate() const;
};

struct AdaptiveCycleRecord {
    CollocationSet points;
    double final_loss = 0.0;
};

struct AdaptiveRunResult {
    ParamVector params;
    OptHistory fine_history;
    std::vector<AdaptiveCycleRecord> cycles;
};

/// Problem factory: builds the PINN objective for a given interior
/// point set (boundary points handled by the factory).
using ProblemFactory =
    std::function<std::unique_ptr<PinnProblem>(const Matrix& interior)>;

/// Adaptive training loop: a fine-grid phase followed by cycles of
/// {sample candidates, score by pointwise residual loss, keep top
/// n_ada, union with a sparse regular grid, train with clipping}.
AdaptiveRunResult adaptive_loop(const ProblemFactory& make_problem,
                                const MaterialField& material,
                                const CollocationSet& fine_set,
                                const ParamVector& params0,
                                const AdaptiveConfig& config,
                                const BfgsOptions& base_opts,
                                double edge_length);

}  // namespace microelast
