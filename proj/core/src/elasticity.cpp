#include "microelast/elasticity.hpp"

#include <cmath>
#include <stdexcept>

namespace microelast {

namespace {
constexpr int UX = 0, UY = 1, SXX = 2, SYY = 3, SXY = 4;

double young_from_lame(const LameConstants& lame) {
    return lame.mu * (3.0 * lame.lambda + 2.0 * lame.mu) /
           (lame.lambda + lame.mu);
}
}  // namespace

void ScaleSet::validate() const {
    if (x_c <= 0 || sigma_c <= 0 || u_c <= 0 || lambda_c <= 0 || mu_c <= 0)
        throw std::invalid_argument("scales: all entries must be > 0");
}

ScaleSet ScaleSet::defaults(double edge_length, double sigma_bar,
                            const MaterialField& material) {
    const LameConstants hi = material.max_constants();
    const LameConstants lo = material.min_constants();
    ScaleSet s;
    s.x_c = 0.5 * edge_length;
    s.sigma_c = sigma_bar;
    s.u_c = sigma_bar * edge_length / young_from_lame(lo);
    s.lambda_c = hi.lambda;
    s.mu_c = hi.mu;
    s.validate();
    return s;
}

FieldSample FieldSample::from_eval(const BatchEval& eval, Eigen::Index col,
                                   const Eigen::Vector2d& x) {
    FieldSample s;
    s.x = x;
    s.u_x = eval.y(UX, col);
    s.u_y = eval.y(UY, col);
    s.s_xx = eval.y(SXX, col);
    s.s_yy = eval.y(SYY, col);
    s.s_xy = eval.y(SXY, col);
    s.dux_dx = eval.jx(UX, col);
    s.dux_dy = eval.jy(UX, col);
    s.duy_dx = eval.jx(UY, col);
    s.duy_dy = eval.jy(UY, col);
    s.dsxx_dx = eval.jx(SXX, col);
    s.dsxx_dy = eval.jy(SXX, col);
    s.dsyy_dx = eval.jx(SYY, col);
    s.dsyy_dy = eval.jy(SYY, col);
    s.dsxy_dx = eval.jx(SXY, col);
    s.dsxy_dy = eval.jy(SXY, col);
    return s;
}

std::pair<double, double> residual_balance(const FieldSample& s) {
    return {s.dsxx_dx + s.dsxy_dy, s.dsxy_dx + s.dsyy_dy};
}

std::array<double, 3> residual_constitutive(const FieldSample& s,
                                            double lambda, double mu) {
    if (lambda < 0.0 || mu <= 0.0)
        throw std::invalid_argument("constitutive: unphysical material");
    const double trace = s.dux_dx + s.duy_dy;
    return {lambda * trace + 2.0 * mu * s.dux_dx - s.s_xx,
            lambda * trace + 2.0 * mu * s.duy_dy - s.s_yy,
            mu * (s.dux_dy + s.duy_dx) - s.s_xy};
}

double internal_work_density(const FieldSample& s) {
    return s.s_xx * s.dux_dx + s.s_yy * s.duy_dy +
           s.s_xy * (s.dux_dy + s.duy_dx);
}

double work_balance_loss(const std::vector<FieldSample>& interior,
                         const std::vector<FieldSample>& boundary,
                         double edge_length) {
    if (interior.empty() || boundary.empty())
        throw std::invalid_argument("work balance: empty point set");
    const double cw =
        edge_length * edge_length / (2.0 * static_cast<double>(interior.size()));
    const double bw = 1.0 / static_cast<double>(boundary.size());
    double s = 0.0;
    for (const auto& p : interior) s += cw * internal_work_density(p);
    for (const auto& p : boundary) s -= bw * (p.s_xx * p.u_x + p.s_xy * p.u_y);
    return s * s;
}

LossBreakdown total_loss_from_fields(const std::vector<FieldSample>& interior,
                                     const std::vector<double>& lambda_hat,
                                     const std::vector<double>& mu_hat,
                                     const std::vector<FieldSample>& boundary,
                                     const ScaleSet& scales,
                                     double edge_length) {
    if (interior.size() != lambda_hat.size() ||
        interior.size() != mu_hat.size())
        throw std::invalid_argument("total_loss: material array mismatch");
    const double kl = scales.kappa_lambda();
    const double km = scales.kappa_mu();
    const double inv_n = 1.0 / static_cast<double>(interior.size());
    LossBreakdown b;
    for (std::size_t i = 0; i < interior.size(); ++i) {
        const auto& s = interior[i];
        auto [rdx, rdy] = residual_balance(s);
        b.l_div_x += rdx * rdx * inv_n;
        b.l_div_y += rdy * rdy * inv_n;
        // Scaled constitutive residual: kappa factors restore the
        // physical argmin.
        const double trace = s.dux_dx + s.duy_dy;
        const double lam = kl * lambda_hat[i], mu = km * mu_hat[i];
        const double rxx = lam * trace + 2.0 * mu * s.dux_dx - s.s_xx;
        const double ryy = lam * trace + 2.0 * mu * s.duy_dy - s.s_yy;
        const double rxy = mu * (s.dux_dy + s.duy_dx) - s.s_xy;
        b.l_const_xx += rxx * rxx * inv_n;
        b.l_const_yy += ryy * ryy * inv_n;
        b.l_const_xy += rxy * rxy * inv_n;
    }
    b.l_work = work_balance_loss(interior, boundary, edge_length / scales.x_c);
    b.finalize();
    return b;
}

LossBreakdown residual_terms_adjoint(const BatchEval& comp, Eigen::Index begin,
                                     Eigen::Index count,
                                     const Vector& lambda_hat,
                                     const Vector& mu_hat, double kappa_l,
                                     double kappa_m, Matrix* ybar,
                                     Matrix* jxbar, Matrix* jybar) {
    LossBreakdown b;
    const double inv_n = 1.0 / static_cast<double>(count);
    for (Eigen::Index k = 0; k < count; ++k) {
        const Eigen::Index i = begin + k;
        const double lam = kappa_l * lambda_hat[k];
        const double mu = kappa_m * mu_hat[k];
        const double rdx = comp.jx(SXX, i) + comp.jy(SXY, i);
        const double rdy = comp.jx(SXY, i) + comp.jy(SYY, i);
        const double trace = comp.jx(UX, i) + comp.jy(UY, i);
        const double rxx = lam * trace + 2.0 * mu * comp.jx(UX, i) - comp.y(SXX, i);
        const double ryy = lam * trace + 2.0 * mu * comp.jy(UY, i) - comp.y(SYY, i);
        const double rxy =
            mu * (comp.jy(UX, i) + comp.jx(UY, i)) - comp.y(SXY, i);
        b.l_div_x += rdx * rdx * inv_n;
        b.l_div_y += rdy * rdy * inv_n;
        b.l_const_xx += rxx * rxx * inv_n;
        b.l_const_yy += ryy * ryy * inv_n;
        b.l_const_xy += rxy * rxy * inv_n;
        if (ybar) {
            const double w = 2.0 * inv_n;
            (*jxbar)(SXX, i) += w * rdx;
            (*jybar)(SXY, i) += w * rdx;
            (*jxbar)(SXY, i) += w * rdy;
            (*jybar)(SYY, i) += w * rdy;

            (*jxbar)(UX, i) += w * (rxx * (lam + 2.0 * mu) + ryy * lam);
            (*jybar)(UY, i) += w * (rxx * lam + ryy * (lam + 2.0 * mu));
            (*ybar)(SXX, i) -= w * rxx;
            (*ybar)(SYY, i) -= w * ryy;
            (*jybar)(UX, i) += w * rxy * mu;
            (*jxbar)(UY, i) += w * rxy * mu;
            (*ybar)(SXY, i) -= w * rxy;
        }
    }
    b.finalize();
    return b;
}

Vector pointwise_residuals(const BatchEval& comp, const Vector& lambda_hat,
                           const Vector& mu_hat, double kappa_l,
                           double kappa_m) {
    const Eigen::Index n = comp.y.cols();
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lam = kappa_l * lambda_hat[i];
        const double mu = kappa_m * mu_hat[i];
        const double rdx = comp.jx(SXX, i) + comp.jy(SXY, i);
        const double rdy = comp.jx(SXY, i) + comp.jy(SYY, i);
        const double trace = comp.jx(UX, i) + comp.jy(UY, i);
        const double rxx = lam * trace + 2.0 * mu * comp.jx(UX, i) - comp.y(SXX, i);
        const double ryy = lam * trace + 2.0 * mu * comp.jy(UY, i) - comp.y(SYY, i);
        const double rxy =
            mu * (comp.jy(UX, i) + comp.jx(UY, i)) - comp.y(SXY, i);
        out[i] = rdx * rdx + rdy * rdy + rxx * rxx + ryy * ryy + rxy * rxy;
    }
    return out;
}

double work_interior_sum(const BatchEval& comp, Eigen::Index begin,
                         Eigen::Index count, double weight) {
    double s = 0.0;
    for (Eigen::Index k = begin; k < begin + count; ++k)
        s += comp.y(SXX, k) * comp.jx(UX, k) + comp.y(SYY, k) * comp.jy(UY, k) +
             comp.y(SXY, k) * (comp.jy(UX, k) + comp.jx(UY, k));
    return weight * s;
}

double work_boundary_sum(const BatchEval& comp, Eigen::Index begin,
                         Eigen::Index count, double weight) {
    double s = 0.0;
    for (Eigen::Index k = begin; k < begin + count; ++k)
        s += comp.y(SXX, k) * comp.y(UX, k) + comp.y(SXY, k) * comp.y(UY, k);
    return weight * s;
}

void work_interior_adjoint(const BatchEval& comp, Eigen::Index begin,
                           Eigen::Index count, double coeff, Matrix& ybar,
                           Matrix& jxbar, Matrix& jybar) {
    for (Eigen::Index k = begin; k < begin + count; ++k) {
        ybar(SXX, k) += coeff * comp.jx(UX, k);
        ybar(SYY, k) += coeff * comp.jy(UY, k);
        ybar(SXY, k) += coeff * (comp.jy(UX, k) + comp.jx(UY, k));
        jxbar(UX, k) += coeff * comp.y(SXX, k);
        jybar(UY, k) += coeff * comp.y(SYY, k);
        jybar(UX, k) += coeff * comp.y(SXY, k);
        jxbar(UY, k) += coeff * comp.y(SXY, k);
    }
}

void work_boundary_adjoint(const BatchEval& comp, Eigen::Index begin,
                           Eigen::Index count, double coeff, Matrix& ybar) {
    for (Eigen::Index k = begin; k < begin + count; ++k) {
        ybar(SXX, k) += coeff * comp.y(UX, k);
        ybar(UX, k) += coeff * comp.y(SXX, k);
        ybar(SXY, k) += coeff * comp.y(UY, k);
        ybar(UY, k) += coeff * comp.y(SXY, k);
    }
}

BvpSpec BvpSpec::uniaxial(double edge_length, double sigma_bar,
                          const MaterialField& material,
                          bool corrected_shear) {
    BvpSpec spec;
    spec.edge_length = edge_length;
    spec.sigma_bar = sigma_bar;
    spec.scales = ScaleSet::defaults(edge_length, sigma_bar, material);
    spec.rules = uniaxial_plate_rules(sigma_bar / spec.scales.sigma_c,
                                      corrected_shear);
    return spec;
}

PinnProblem::PinnProblem(Topology topo, HardBcRules rules,
                         const MaterialField& material, ScaleSet scales,
                         double edge_length, Matrix interior_points,
                         Matrix boundary_points)
    : net_(std::move(topo)), rules_(rules), scales_(scales),
      edge_length_(edge_length) {
    scales_.validate();
    if (interior_points.cols() == 0 || boundary_points.cols() == 0)
        throw std::invalid_argument("pinn problem: empty point set");
    x_int_ = interior_points / scales_.x_c;
    x_bnd_ = boundary_points / scales_.x_c;
    lambda_hat_.resize(interior_points.cols());
    mu_hat_.resize(interior_points.cols());
    for (Eigen::Index i = 0; i < interior_points.cols(); ++i) {
        LameConstants lame = material.query(interior_points.col(i));
        lambda_hat_[i] = lame.lambda / scales_.lambda_c;
        mu_hat_[i] = lame.mu / scales_.mu_c;
    }
}

BatchEval PinnProblem::evaluate_scaled(const ParamVector& params,
                                       const Matrix& x_hat,
                                       ForwardTape* tape) const {
    BatchEval raw = net_.forward_with_jacobian(params, x_hat, tape);
    return compose(raw, rules_, x_hat);
}

LossBreakdown PinnProblem::loss(const ParamVector& params) const {
    return loss_and_grad_impl(params, nullptr);
}

std::pair<LossBreakdown, Vector> PinnProblem::loss_and_grad(
    const ParamVector& params) const {
    Vector grad = Vector::Zero(net_.topology().param_count());
    LossBreakdown b = loss_and_grad_impl(params, &grad);
    return {b, std::move(grad)};
}

LossBreakdown PinnProblem::loss_and_grad_impl(const ParamVector& params,
                                              Vector* grad) const {
    const Eigen::Index n = x_int_.cols(), nb = x_bnd_.cols();
    Matrix x(2, n + nb);
    x << x_int_, x_bnd_;
    ForwardTape tape;
    BatchEval raw = net_.forward_with_jacobian(params, x, grad ? &tape : nullptr);
    BatchEval comp = compose(raw, rules_, x);

    Matrix ybar, jxbar, jybar;
    Matrix* yb = nullptr;
    Matrix* jxb = nullptr;
    Matrix* jyb = nullptr;
    if (grad) {
        ybar = Matrix::Zero(kNumOutputs, n + nb);
        jxbar = Matrix::Zero(kNumOutputs, n + nb);
        jybar = Matrix::Zero(kNumOutputs, n + nb);
        yb = &ybar;
        jxb = &jxbar;
        jyb = &jybar;
    }

    LossBreakdown b =
        residual_terms_adjoint(comp, 0, n, lambda_hat_, mu_hat_,
                               scales_.kappa_lambda(), scales_.kappa_mu(), yb,
                               jxb, jyb);

    const double l_hat = edge_length_ / scales_.x_c;
    const double cw = l_hat * l_hat / (2.0 * static_cast<double>(n));
    const double bw = 1.0 / static_cast<double>(nb);
    const double s = work_interior_sum(comp, 0, n, cw) -
                     work_boundary_sum(comp, n, nb, bw);
    b.l_work = s * s;
    b.finalize();

    if (grad) {
        work_interior_adjoint(comp, 0, n, 2.0 * s * cw, ybar, jxbar, jybar);
        work_boundary_adjoint(comp, n, nb, -2.0 * s * bw, ybar);
        compose_backward(rules_, x, raw, ybar, jxbar, jybar);
        net_.backward(params, tape, ybar, jxbar, jybar, *grad);
    }
    return b;
}

Vector PinnProblem::pointwise_residual_loss(
    const ParamVector& params, const Matrix& candidates,
    const MaterialField& material) const {
    Matrix x_hat = candidates / scales_.x_c;
    BatchEval comp = evaluate_scaled(params, x_hat);
    Vector lam(candidates.cols()), mu(candidates.cols());
    for (Eigen::Index i = 0; i < candidates.cols(); ++i) {
        LameConstants lame = material.query(candidates.col(i));
        lam[i] = lame.lambda / scales_.lambda_c;
        mu[i] = lame.mu / scales_.mu_c;
    }
    return pointwise_residuals(comp, lam, mu, scales_.kappa_lambda(),
                               scales_.kappa_mu());
}

}  // namespace microelast
