#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace microelast {

struct BfgsOptions {
    int max_iters = 500;
    double grad_tol = 1e-9;   // infinity norm
    double step_tol = 1e-12;  // relative step length
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    std::optional<double> clip_alpha;
};

enum class TerminationReason { grad_tol, step_tol, max_iters, line_search_fail };

std::string to_string(TerminationReason r);

struct IterationRecord {
    double loss;
    double grad_norm;  // infinity norm
    double step_length;
};

struct OptHistory {
    std::vector<IterationRecord> iterations;
    TerminationReason reason = TerminationReason::max_iters;
};

using Objective =
    std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;

struct OptResult {
    Eigen::VectorXd params;
    double loss;
    OptHistory history;
};

/// Full-memory BFGS with a strong-Wolfe line search. The dense inverse
/// Hessian starts from the identity and is rescaled after the first
/// accepted step. Non-finite evaluations terminate with the best
/// parameters seen so far.
OptResult minimize(const Objective& objective, const Eigen::VectorXd& x0,
                   const BfgsOptions& opts);

/// Norm clipping: rescale g to norm alpha when ||g|| > alpha.
Eigen::VectorXd clip(const Eigen::VectorXd& grad, double alpha);

}  // namespace microelast
