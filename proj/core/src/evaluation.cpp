#include "microelast/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace microelast {

GridStats grid_stats(const Vector& grid) {
    if (grid.size() == 0)
        throw std::invalid_argument("grid_stats: empty grid");
    return {grid.mean(), grid.maxCoeff(), grid.minCoeff()};
}

namespace {

/// Scaled BatchEval column -> physical FieldSample.
FieldSample to_physical(const BatchEval& comp, Eigen::Index c,
                        const Eigen::Vector2d& x_physical,
                        const ScaleSet& sc) {
    FieldSample s;
    s.x = x_physical;
    const double du = sc.u_c / sc.x_c, ds = sc.sigma_c / sc.x_c;
    s.u_x = comp.y(0, c) * sc.u_c;
    s.u_y = comp.y(1, c) * sc.u_c;
    s.s_xx = comp.y(2, c) * sc.sigma_c;
    s.s_yy = comp.y(3, c) * sc.sigma_c;
    s.s_xy = comp.y(4, c) * sc.sigma_c;
    s.dux_dx = comp.jx(0, c) * du;
    s.dux_dy = comp.jy(0, c) * du;
    s.duy_dx = comp.jx(1, c) * du;
    s.duy_dy = comp.jy(1, c) * du;
    s.dsxx_dx = comp.jx(2, c) * ds;
    s.dsxx_dy = comp.jy(2, c) * ds;
    s.dsyy_dx = comp.jx(3, c) * ds;
    s.dsyy_dy = comp.jy(3, c) * ds;
    s.dsxy_dx = comp.jx(4, c) * ds;
    s.dsxy_dy = comp.jy(4, c) * ds;
    return s;
}

}  // namespace

ResidualReport residual_report(const Predictor& model,
                               const MaterialField& material,
                               const ScaleSet& scales, double edge_length,
                               int n_per_side) {
    CollocationSet grid = regular_grid(n_per_side, edge_length);
    const Eigen::Index n = grid.interior.cols();
    BatchEval comp = model(grid.interior);

    ResidualReport rep;
    rep.n_per_side = n_per_side;
    rep.points = grid.interior;
    rep.r_div_x.resize(n);
    rep.r_div_y.resize(n);
    rep.r_const_xx.resize(n);
    rep.r_const_yy.resize(n);
    rep.r_const_xy.resize(n);
    rep.r_total.resize(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const FieldSample s =
            to_physical(comp, c, grid.interior.col(c), scales);
        const LameConstants lame = material.query(s.x);
        auto [rx, ry] = residual_balance(s);
        auto rc = residual_constitutive(s, lame.lambda, lame.mu);
        rep.r_div_x[c] = rx;
        rep.r_div_y[c] = ry;
        rep.r_const_xx[c] = rc[0];
        rep.r_const_yy[c] = rc[1];
        rep.r_const_xy[c] = rc[2];
        rep.r_total[c] = std::abs(rx) + std::abs(ry) + std::abs(rc[0]) +
                         std::abs(rc[1]) + std::abs(rc[2]);
    }
    rep.div_x = grid_stats(rep.r_div_x);
    rep.div_y = grid_stats(rep.r_div_y);
    rep.const_xx = grid_stats(rep.r_const_xx);
    rep.const_yy = grid_stats(rep.r_const_yy);
    rep.const_xy = grid_stats(rep.r_const_xy);
    rep.total = grid_stats(rep.r_total);

    // Work-balance norm in scaled units on the same grid.
    BatchEval comp_b = model(grid.boundary);
    std::vector<FieldSample> interior, boundary;
    interior.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < n; ++c)
        interior.push_back(FieldSample::from_eval(
            comp, c, grid.interior.col(c) / scales.x_c));
    for (Eigen::Index c = 0; c < grid.boundary.cols(); ++c)
        boundary.push_back(FieldSample::from_eval(
            comp_b, c, grid.boundary.col(c) / scales.x_c));
    rep.work_norm =
        std::sqrt(work_balance_loss(interior, boundary, 2.0));
    return rep;
}

Vector score_candidates(const Predictor& model, const Matrix& candidates,
                        const MaterialField& material,
                        const ScaleSet& scales) {
    BatchEval comp = model(candidates);
    Vector lam(candidates.cols()), mu(candidates.cols());
    for (Eigen::Index c = 0; c < candidates.cols(); ++c) {
        LameConstants l = material.query(candidates.col(c));
        lam[c] = l.lambda / scales.lambda_c;
        mu[c] = l.mu / scales.mu_c;
    }
    return pointwise_residuals(comp, lam, mu, scales.kappa_lambda(),
                               scales.kappa_mu());
}

std::string to_string(Method m) {
    switch (m) {
        case Method::pinn: return "pinn";
        case Method::cpinn: return "cpinn";
        case Method::ada_pinn: return "ada_pinn";
        case Method::ada_cpinn: return "ada_cpinn";
    }
    return "unknown";
}

int units_for_budget(std::int64_t budget, int n_layers, int n_subnets) {
    if (budget < 1 || n_layers < 1 || n_subnets < 1)
        throw std::invalid_argument("units_for_budget: positive args");
    int best = 1;
    for (int n = 1;; ++n) {
        Topology t;
        t.n_layers = n_layers;
        t.units_per_layer = n;
        if (t.param_count() * n_subnets > budget) break;
        best = n;
    }
    return best;
}

Predictor TrainedModel::predictor() const {
    if (method == Method::pinn || method == Method::ada_pinn) {
        auto problem = pinn;
        Vector theta_copy = theta;
        const double x_c = problem->scales().x_c;
        return [problem, theta_copy, x_c](const Matrix& x_physical) {
            return problem->evaluate_scaled(ParamVector{theta_copy},
                                            x_physical / x_c);
        };
    }
    auto problem = cpinn;
    Vector theta_copy = theta;
    return [problem, theta_copy](const Matrix& x_physical) {
        return problem->predict(theta_copy, x_physical);
    };
}

namespace {

Topology budget_topology(const StudyConfig& cfg, int n_subnets) {
    Topology t;
    t.input_dim = 2;
    t.output_dim = kNumOutputs;
    t.n_layers = cfg.n_layers;
    t.activation = cfg.activation;
    t.units_per_layer =
        cfg.fixed_units > 0
            ? cfg.fixed_units
            : units_for_budget(cfg.param_budget, cfg.n_layers, n_subnets);
    return t;
}

OptResult train_params(const std::function<std::pair<double, Vector>(
                           const Vector&)>& objective,
                       const Vector& theta0, const BfgsOptions& opts) {
    return minimize(objective, theta0, opts);
}

TrainedModel train_single(const StudyConfig& cfg,
                          const MaterialField& material,
                          const CollocationSet& points, bool adaptive) {
    TrainedModel m;
    m.method = adaptive ? Method::ada_pinn : Method::pinn;
    m.topology = budget_topology(cfg, 1);
    BvpSpec bvp = BvpSpec::uniaxial(cfg.edge_length, cfg.sigma_bar, material,
                                    cfg.corrected_shear);
    Matrix boundary = points.boundary;
    auto make = [&, bvp](const Matrix& interior) {
        return std::make_unique<PinnProblem>(m.topology, bvp.rules, material,
                                             bvp.scales, bvp.edge_length,
                                             interior, boundary);
    };
    ParamVector p0 = init_params(m.topology, cfg.seed);
    if (adaptive) {
        AdaptiveRunResult r = adaptive_loop(make, material, points, p0,
                                            cfg.adaptive, cfg.bfgs,
                                            cfg.edge_length);
        m.theta = r.params.values;
        m.history = std::move(r.fine_history);
        m.final_loss = r.cycles.empty()
                           ? (m.history.iterations.empty()
                                  ? 0.0
                                  : m.history.iterations.back().loss)
                           : r.cycles.back().final_loss;
    } else {
        auto problem = make(points.interior);
        auto objective = [&](const Vector& theta) {
            auto [b, g] = problem->loss_and_grad(ParamVector{theta});
            return std::make_pair(b.total, std::move(g));
        };
        OptResult r = train_params(objective, p0.values, cfg.bfgs);
        m.theta = r.params;
        m.history = std::move(r.history);
        m.final_loss = r.loss;
    }
    m.pinn = std::shared_ptr<PinnProblem>(make(points.interior));
    return m;
}

TrainedModel train_decomposed(const StudyConfig& cfg,
                              const MaterialField& material,
                              const CollocationSet& points, bool adaptive) {
    TrainedModel m;
    m.method = adaptive ? Method::ada_cpinn : Method::cpinn;
    const auto [nx, ny] = cfg.cpinn_split;
    m.topology = budget_topology(cfg, nx * ny);
    BvpSpec bvp = BvpSpec::uniaxial(cfg.edge_length, cfg.sigma_bar, material,
                                    cfg.corrected_shear);
    Decomposition decomp = decompose(nx, ny);
    CpinnOptions copts;
    copts.psi = cfg.psi;
    copts.interface_full = cfg.interface_full;
    auto make = [&, bvp](const CollocationSet& set) {
        return std::make_shared<CpinnProblem>(m.topology, bvp, material,
                                              decomp, set, copts);
    };
    auto objective_of = [](const std::shared_ptr<CpinnProblem>& problem) {
        return [problem](const Vector& theta) {
            auto [l, g] = problem->loss_and_grad(theta);
            return std::make_pair(l.total, std::move(g));
        };
    };
    auto problem = make(points);
    Vector theta = problem->init_params(cfg.seed);
    if (!adaptive) {
        OptResult r = train_params(objective_of(problem), theta, cfg.bfgs);
        m.theta = r.params;
        m.history = std::move(r.history);
        m.final_loss = r.loss;
    } else {
        const AdaptiveConfig& ac = cfg.adaptive;
        ac.validate();
        if (ac.n_fine > 0) {
            BfgsOptions opts = cfg.bfgs;
            opts.max_iters = ac.n_fine;
            opts.clip_alpha.reset();
            OptResult r = train_params(objective_of(problem), theta, opts);
            theta = r.params;
            m.history = std::move(r.history);
            m.final_loss = r.loss;
        }
        const int side = std::max(
            2, static_cast<int>(std::lround(
                   std::sqrt(static_cast<double>(ac.n_reg)))));
        for (int cycle = 0; cycle < ac.n_iter; ++cycle) {
            CollocationSet sparse = regular_grid(side, cfg.edge_length);
            CollocationSet rand =
                uniform_random(ac.n_rand, cfg.edge_length,
                               ac.seed + 0x9e3779b9ull * cycle);
            auto scorer = problem;
            Vector theta_copy = theta;
            Predictor pred = [scorer, theta_copy](const Matrix& x) {
                return scorer->predict(theta_copy, x);
            };
            Vector losses = score_candidates(pred, rand.interior, material,
                                             bvp.scales);
            std::vector<Eigen::Index> keep =
                select_adaptive(losses, ac.n_ada);
            Matrix ada(2, static_cast<Eigen::Index>(keep.size()));
            for (std::size_t i = 0; i < keep.size(); ++i)
                ada.col(static_cast<Eigen::Index>(i)) =
                    rand.interior.col(keep[i]);
            CollocationSet combined;
            combined.provenance = Provenance::combined;
            combined.interior = combine_points(sparse.interior, ada);
            combined.boundary = sparse.boundary;
            combined.boundary_edges = sparse.boundary_edges;
            problem = make(combined);
            BfgsOptions opts = cfg.bfgs;
            opts.max_iters = ac.cycle_iters;
            opts.clip_alpha = ac.alpha;
            OptResult r = train_params(objective_of(problem), theta, opts);
            theta = r.params;
            m.final_loss = r.loss;
        }
        m.theta = theta;
    }
    m.cpinn = problem;
    return m;
}

}  // namespace

TrainedModel train_model(Method method, const StudyConfig& config,
                         const MaterialField& material, int train_side) {
    CollocationSet points = regular_grid(train_side, config.edge_length);
    switch (method) {
        case Method::pinn:
            return train_single(config, material, points, false);
        case Method::ada_pinn:
            return train_single(config, material, points, true);
        case Method::cpinn:
            return train_decomposed(config, material, points, false);
        case Method::ada_cpinn:
            return train_decomposed(config, material, points, true);
    }
    throw std::invalid_argument("train_model: unknown method");
}

StudyResult convergence_study(const StudyConfig& config, Method method,
                              const MaterialField& material) {
    if (config.budgets.empty())
        throw std::invalid_argument("convergence_study: empty budget list");
    StudyResult result;
    result.method = method;
    result.param_budget = config.param_budget;
    result.seed = config.seed;
    result.eval_side = config.eval_side;
    for (int side : config.budgets) {
        StudyRow row;
        row.key = side;
        try {
            TrainedModel m = train_model(method, config, material, side);
            ResidualReport rep =
                residual_report(m.predictor(), material,
                                m.method == Method::pinn ||
                                        m.method == Method::ada_pinn
                                    ? m.pinn->scales()
                                    : m.cpinn->scales(),
                                config.edge_length, config.eval_side);
            row.mean_r = rep.total.mean;
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

StudyResult split_study(const StudyConfig& config,
                        const MaterialField& material) {
    if (config.splits.empty())
        throw std::invalid_argument("split_study: empty split list");
    StudyResult result;
    result.method = Method::cpinn;
    result.param_budget = config.param_budget;
    result.seed = config.seed;
    result.eval_side = config.eval_side;
    for (int n : config.splits) {
        StudyRow row;
        row.key = n;
        try {
            StudyConfig cfg = config;
            cfg.cpinn_split = {n, n};
            TrainedModel m = train_model(Method::cpinn, cfg, material,
                                         config.train_side);
            ResidualReport rep =
                residual_report(m.predictor(), material, m.cpinn->scales(),
                                config.edge_length, config.eval_side);
            row.mean_r = rep.total.mean;
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

}  // namespace microelast
