#pragma once

#include <vector>

#include "microelast/boundary.hpp"
#include "microelast/material.hpp"
#include "microelast/network.hpp"

namespace microelast {

/// Characteristic divisors used to bring all loss terms to a common
/// order of magnitude.
struct ScaleSet {
    double x_c;       // mm
    double sigma_c;   // MPa
    double u_c;       // mm
    double lambda_c;  // MPa
    double mu_c;      // MPa

    void validate() const;

    /// x_c = L/2, sigma_c = traction, u_c = sigma_bar * L / E_min,
    /// lambda_c / mu_c = maxima over the material phases.
    static ScaleSet defaults(double edge_length, double sigma_bar,
                             const MaterialField& material);

    /// Conversion factors that make the scaled constitutive residual a
    /// multiple of the physical one: kappa = c * u_c / (x_c * sigma_c).
    double kappa_lambda() const { return lambda_c * u_c / (x_c * sigma_c); }
    double kappa_mu() const { return mu_c * u_c / (x_c * sigma_c); }
};

/// One evaluated field point: outputs and their spatial first
/// derivatives. Unit-agnostic; the residual operations below are plain
/// algebra on whatever scale the caller supplies.
struct FieldSample {
    Eigen::Vector2d x;
    double u_x = 0, u_y = 0, s_xx = 0, s_yy = 0, s_xy = 0;
    double dux_dx = 0, dux_dy = 0, duy_dx = 0, duy_dy = 0;
    double dsxx_dx = 0, dsxx_dy = 0;
    double dsyy_dx = 0, dsyy_dy = 0;
    double dsxy_dx = 0, dsxy_dy = 0;

    static FieldSample from_eval(const BatchEval& eval, Eigen::Index col,
                                 const Eigen::Vector2d& x);
};

/// Momentum balance residual (r_x, r_y).
std::pair<double, double> residual_balance(const FieldSample& s);

/// Constitutive residuals (r_xx, r_yy, r_xy) for isotropic linear
/// elasticity with the 2D form of the material law applied verbatim.
std::array<double, 3> residual_constitutive(const FieldSample& s,
                                            double lambda, double mu);

/// sigma : grad(u) density (without the 1/2; that factor lives in the
/// interior quadrature weight).
double internal_work_density(const FieldSample& s);

/// Squared defect between the interior work quadrature (weight
/// L^2/(2 n_d)) and the loaded-edge work quadrature (weight 1/n_b).
double work_balance_loss(const std::vector<FieldSample>& interior,
                         const std::vector<FieldSample>& boundary,
                         double edge_length);

struct LossBreakdown {
    double l_div_x = 0, l_div_y = 0;
    double l_const_xx = 0, l_const_yy = 0, l_const_xy = 0;
    double l_work = 0;
    double total = 0;

    void finalize() {
        total = l_div_x + l_div_y + l_const_xx + l_const_yy + l_const_xy +
                l_work;
    }
};

/// Boundary-value problem summary for the uniaxial unit cell.
struct BvpSpec {
    double edge_length;  // mm
    double sigma_bar;    // MPa
    HardBcRules rules;   // in scaled coordinates
    ScaleSet scales;

    static BvpSpec uniaxial(double edge_length, double sigma_bar,
                            const MaterialField& material,
                            bool corrected_shear = false);
};

/// Reference-path loss assembly from explicit field samples in scaled
/// units; mirrors the batched path and doubles as its test oracle.
LossBreakdown total_loss_from_fields(const std::vector<FieldSample>& interior,
                                     const std::vector<double>& lambda_hat,
                                     const std::vector<double>& mu_hat,
                                     const std::vector<FieldSample>& boundary,
                                     const ScaleSet& scales,
                                     double edge_length);

/// Building blocks shared between the single-network and the
/// domain-decomposed objectives. `begin`/`count` select a column range
/// of the composed batch; adjoint matrices may be null to skip the
/// reverse seeds. Returned terms are already mean-normalized by count.
LossBreakdown residual_terms_adjoint(const BatchEval& comp,
                                     Eigen::Index begin, Eigen::Index count,
                                     const Vector& lambda_hat,
                                     const Vector& mu_hat, double kappa_l,
                                     double kappa_m, Matrix* ybar,
                                     Matrix* jxbar, Matrix* jybar);

/// Per-point squared residual sums (work term excluded).
Vector pointwise_residuals(const BatchEval& comp, const Vector& lambda_hat,
                           const Vector& mu_hat, double kappa_l,
                           double kappa_m);

double work_interior_sum(const BatchEval& comp, Eigen::Index begin,
                         Eigen::Index count, double weight);
double work_boundary_sum(const BatchEval& comp, Eigen::Index begin,
                         Eigen::Index count, double weight);
void work_interior_adjoint(const BatchEval& comp, Eigen::Index begin,
                           Eigen::Index count, double coeff, Matrix& ybar,
                           Matrix& jxbar, Matrix& jybar);
void work_boundary_adjoint(const BatchEval& comp, Eigen::Index begin,
                           Eigen::Index count, double coeff, Matrix& ybar);

/// Collocation-based PINN objective for one network on one (sub)domain:
/// batched loss evaluation and exact parameter gradients. Points are
/// physical; the problem converts to scaled coordinates internally.
class PinnProblem {
  public:
    PinnProblem(Topology topo, HardBcRules rules, const MaterialField& material,
                ScaleSet scales, double edge_length, Matrix interior_points,
                Matrix boundary_points);

    const Network& network() const { return net_; }
    const ScaleSet& scales() const { return scales_; }
    const HardBcRules& rules() const { return rules_; }
    Eigen::Index n_interior() const { return x_int_.cols(); }

    LossBreakdown loss(const ParamVector& params) const;
    std::pair<LossBreakdown, Vector> loss_and_grad(
        const ParamVector& params) const;

    /// Per-point residual loss (squared residual sum, work term
    /// excluded) at arbitrary physical candidate points; used for
    /// adaptive scoring.
    Vector pointwise_residual_loss(const ParamVector& params,
                                   const Matrix& candidates,
                                   const MaterialField& material) const;

    /// Composed (hard-BC) scaled evaluation at scaled points.
    BatchEval evaluate_scaled(const ParamVector& params, const Matrix& x_hat,
                              ForwardTape* tape = nullptr) const;

  private:
    LossBreakdown loss_and_grad_impl(const ParamVector& params,
                                     Vector* grad) const;

    Network net_;
    HardBcRules rules_;
    ScaleSet scales_;
    double edge_length_;
    Matrix x_int_, x_bnd_;     // scaled coordinates
    Vector lambda_hat_, mu_hat_;  // material at interior points, scaled
};

}  // namespace microelast
