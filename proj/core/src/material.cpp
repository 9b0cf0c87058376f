#include "microelast/material.hpp"

#include <cmath>
#include <stdexcept>

#include "microelast/optimizer.hpp"

namespace microelast {

LameConstants lame_from_engineering(const EngineeringConstants& ec) {
    if (ec.youngs_modulus <= 0.0)
        throw std::invalid_argument("material: E must be > 0");
    if (ec.poisson_ratio <= -1.0 || ec.poisson_ratio >= 0.5)
        throw std::invalid_argument("material: nu must lie in (-1, 0.5)");
    const double e = ec.youngs_modulus, nu = ec.poisson_ratio;
    return {e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu))};
}

void MaterialField::check_domain(Eigen::Vector2d& x) const {
    const double half = 0.5 * edge_length();
    const double tol = 1e-9;
    for (int i = 0; i < 2; ++i) {
        if (std::abs(x[i]) > half + tol)
            throw std::out_of_range("material: query outside domain");
        x[i] = std::clamp(x[i], -half, half);
    }
}

ConstantMaterial::ConstantMaterial(LameConstants lame, double edge_length)
    : lame_(lame), length_(edge_length) {
    if (lame.lambda < 0.0 || lame.mu <= 0.0)
        throw std::invalid_argument("material: need lambda >= 0, mu > 0");
}

LameConstants ConstantMaterial::query(const Eigen::Vector2d& x) const {
    Eigen::Vector2d p = x;
    check_domain(p);
    return lame_;
}

TanhInclusionSpec TanhInclusionSpec::calibrated(double center_value,
                                                double far_value,
                                                double radius, double delta) {
    if (delta <= 0.0) throw std::invalid_argument("tanh spec: delta > 0");
    // Saturated values: center c1*(c2 + 1) + c3, far c1*(c2 - 1) + c3.
    // With c2 = 0 the 2x2 system decouples.
    TanhInclusionSpec s;
    s.c1 = 0.5 * (center_value - far_value);
    s.c2 = 0.0;
    s.c3 = 0.5 * (center_value + far_value);
    s.delta = delta;
    s.radius = radius;
    return s;
}

double TanhInclusionSpec::value(const Eigen::Vector2d& x) const {
    const double r = x.norm();
    return c1 * (c2 + std::tanh((radius - r) / delta)) + c3;
}

Eigen::Vector2d TanhInclusionSpec::gradient(const Eigen::Vector2d& x) const {
    const double r = x.norm();
    if (r == 0.0) return Eigen::Vector2d::Zero();
    const double t = std::tanh((radius - r) / delta);
    const double dv_dr = -c1 * (1.0 - t * t) / delta;
    return dv_dr / r * x;
}

TanhInclusionMaterial::TanhInclusionMaterial(LameConstants inclusion,
                                             LameConstants matrix,
                                             double radius, double delta,
                                             double edge_length)
    : lambda_(TanhInclusionSpec::calibrated(inclusion.lambda, matrix.lambda,
                                            radius, delta)),
      mu_(TanhInclusionSpec::calibrated(inclusion.mu, matrix.mu, radius,
                                        delta)),
      length_(edge_length) {}

LameConstants TanhInclusionMaterial::query(const Eigen::Vector2d& x) const {
    Eigen::Vector2d p = x;
    check_domain(p);
    return {lambda_.value(p), mu_.value(p)};
}

LameConstants TanhInclusionMaterial::max_constants() const {
    const double lam_hi =
        std::max(lambda_.c1 + lambda_.c3, lambda_.c3 - lambda_.c1);
    const double mu_hi = std::max(mu_.c1 + mu_.c3, mu_.c3 - mu_.c1);
    return {lam_hi, mu_hi};
}

LameConstants TanhInclusionMaterial::min_constants() const {
    const double lam_lo =
        std::min(lambda_.c1 + lambda_.c3, lambda_.c3 - lambda_.c1);
    const double mu_lo = std::min(mu_.c1 + mu_.c3, mu_.c3 - mu_.c1);
    return {lam_lo, mu_lo};
}

bool VoxelGrid::is_binary() const {
    for (double v : values)
        if (v != 0.0 && v != 1.0) return false;
    return true;
}

Eigen::Vector2d voxel_center(const VoxelGrid& grid, int row, int col,
                             double edge_length) {
    // Row 0 is the top of the image.
    const double dx = edge_length / grid.width;
    const double dy = edge_length / grid.height;
    return {-0.5 * edge_length + (col + 0.5) * dx,
            0.5 * edge_length - (row + 0.5) * dy};
}

namespace {

double bounded(double raw, double lo, double hi) {
    return (std::tanh(raw) + 1.0) * 0.5 * (hi - lo) + lo;
}

double bounded_d(double raw, double lo, double hi) {
    const double t = std::tanh(raw);
    return (1.0 - t * t) * 0.5 * (hi - lo);
}

}  // namespace

MaterialNetwork::MaterialNetwork(Topology topo, ParamVector params,
                                 LameConstants lo, LameConstants hi,
                                 double edge_length)
    : net_(std::move(topo)), params_(std::move(params)), lo_(lo), hi_(hi),
      length_(edge_length) {
    if (net_.topology().output_dim != 2)
        throw std::invalid_argument("material network: output_dim must be 2");
}

LameConstants MaterialNetwork::query(const Eigen::Vector2d& x) const {
    Eigen::Vector2d p = x;
    check_domain(p);
    Matrix out = net_.forward(params_, p);
    return {bounded(out(0, 0), lo_.lambda, hi_.lambda),
            bounded(out(1, 0), lo_.mu, hi_.mu)};
}

std::pair<Vector, Vector> MaterialNetwork::query_batch(const Matrix& x) const {
    Matrix out = net_.forward(params_, x);
    Vector lam(x.cols()), mu(x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        lam[i] = bounded(out(0, i), lo_.lambda, hi_.lambda);
        mu[i] = bounded(out(1, i), lo_.mu, hi_.mu);
    }
    return {std::move(lam), std::move(mu)};
}

std::unique_ptr<MaterialNetwork> train_material_network(
    const VoxelGrid& grid, LameConstants phase0, LameConstants phase1,
    double edge_length, const MaterialNetOptions& opts) {
    if (!grid.is_binary())
        throw std::invalid_argument("material network: grid must be binary");
    Topology topo = opts.topology;
    topo.input_dim = 2;
    topo.output_dim = 2;
    Network net(topo);

    const LameConstants lo{std::min(phase0.lambda, phase1.lambda),
                           std::min(phase0.mu, phase1.mu)};
    const LameConstants hi{std::max(phase0.lambda, phase1.lambda),
                           std::max(phase0.mu, phase1.mu)};

    const auto n = static_cast<Eigen::Index>(grid.values.size());
    Matrix x(2, n);
    Vector t_lam(n), t_mu(n);
    Eigen::Index i = 0;
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c, ++i) {
            x.col(i) = voxel_center(grid, r, c, edge_length);
            const LameConstants& ph = grid.at(r, c) == 1.0 ? phase1 : phase0;
            t_lam[i] = ph.lambda;
            t_mu[i] = ph.mu;
        }
    }

    // MSE on targets scaled by the per-component maxima.
    const double lam_c = hi.lambda, mu_c = hi.mu;
    auto objective = [&](const Vector& theta) {
        ParamVector p{theta};
        auto [value, grad] = loss_gradient(
            net, p, x,
            [&](const BatchEval& eval, Matrix& ybar, Matrix& jxbar,
                Matrix& jybar) {
                (void)jxbar;
                (void)jybar;
                double loss = 0.0;
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double rl =
                        (bounded(eval.y(0, j), lo.lambda, hi.lambda) -
                         t_lam[j]) /
                        lam_c;
                    const double rm =
                        (bounded(eval.y(1, j), lo.mu, hi.mu) - t_mu[j]) / mu_c;
                    loss += rl * rl + rm * rm;
                    ybar(0, j) = 2.0 * rl / lam_c *
                                 bounded_d(eval.y(0, j), lo.lambda, hi.lambda);
                    ybar(1, j) =
                        2.0 * rm / mu_c * bounded_d(eval.y(1, j), lo.mu, hi.mu);
                }
                const double inv_n = 1.0 / static_cast<double>(n);
                ybar *= inv_n;
                return loss * inv_n;
            });
        return std::make_pair(value, grad);
    };

    ParamVector p0 = init_params(topo, opts.seed);
    BfgsOptions bopts;
    bopts.max_iters = opts.max_iters;
    OptResult res = minimize(objective, p0.values, bopts);
    return std::make_unique<MaterialNetwork>(topo, ParamVector{res.params}, lo,
                                             hi, edge_length);
}

}  // namespace microelast
