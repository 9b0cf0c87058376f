#pragma once

#include <array>
#include <Eigen/Dense>

#include "microelast/network.hpp"

namespace microelast {

/// Bivariate polynomial, degree <= 2 per variable: sum c(i,j) x^i y^j.
struct Poly2 {
    Eigen::Matrix3d c = Eigen::Matrix3d::Zero();

    static Poly2 constant(double v);
    double value(double x, double y) const;
    double dx(double x, double y) const;
    double dy(double x, double y) const;
};

enum class OutputId : int { u_x = 0, u_y = 1, s_xx = 2, s_yy = 3, s_xy = 4 };
constexpr int kNumOutputs = 5;

/// Hard boundary composition rule for one output: N = G + D * Nraw.
/// G and D live in scaled coordinates (unit cell edges at +-1).
struct HardBcRule {
    Poly2 extension;  // G
    Poly2 distance;   // D
};

using HardBcRules = std::array<HardBcRule, kNumOutputs>;

/// The uniaxial-plate rule set; `sigma_bar` is the already-scaled
/// traction value. `corrected_shear` selects a shear distance function
/// vanishing on all four edges instead of the printed right/top one.
HardBcRules uniaxial_plate_rules(double sigma_bar,
                                 bool corrected_shear = false);

/// Unconstrained rule set (G = 0, D = 1 for every output).
HardBcRules free_rules();

struct Box {
    double x_min, x_max, y_min, y_max;
    bool contains(double x, double y, double tol = 1e-12) const {
        return x >= x_min - tol && x <= x_max + tol && y >= y_min - tol &&
               y <= y_max + tol;
    }
};

/// Restrict a global rule set to a subdomain: a rule survives only if
/// its constrained segment (zero set of D on the outer boundary)
/// touches the box; otherwise the output becomes unconstrained.
HardBcRules subdomain_rules(const HardBcRules& rules, const Box& box);

/// Apply N = G + D * Nraw to a batched raw evaluation, propagating the
/// product rule through the input-Jacobians. `x` holds the scaled
/// points, one per column.
BatchEval compose(const BatchEval& raw, const HardBcRules& rules,
                  const Matrix& x);

/// Pull adjoint seeds of the composed fields back to seeds of the raw
/// network outputs (in place).
void compose_backward(const HardBcRules& rules, const Matrix& x,
                      const BatchEval& raw, Matrix& ybar, Matrix& jxbar,
                      Matrix& jybar);

}  // namespace microelast
