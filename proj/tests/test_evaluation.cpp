#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "microelast/evaluation.hpp"

using namespace microelast;

namespace {

LameConstants homogeneous() { return lame_from_engineering({1.0e4, 0.4}); }

// Exact plane-strain uniaxial predictor in scaled outputs.
Predictor exact_predictor(const ScaleSet& sc, double sigma_bar,
                          const LameConstants& m) {
    Eigen::Matrix2d a;
    a << m.lambda + 2.0 * m.mu, m.lambda, m.lambda, m.lambda + 2.0 * m.mu;
    Eigen::Vector2d eps = a.fullPivLu().solve(
        Eigen::Vector2d(sigma_bar, 0.0));
    return [sc, eps, sigma_bar](const Matrix& x_physical) {
        const Eigen::Index n = x_physical.cols();
        BatchEval e;
        e.y = Matrix::Zero(kNumOutputs, n);
        e.jx = Matrix::Zero(kNumOutputs, n);
        e.jy = Matrix::Zero(kNumOutputs, n);
        for (Eigen::Index c = 0; c < n; ++c) {
            const double x = x_physical(0, c), y = x_physical(1, c);
            e.y(0, c) = eps[0] * (x + sc.x_c) / sc.u_c;
            e.y(1, c) = eps[1] * (y + sc.x_c) / sc.u_c;
            e.y(2, c) = sigma_bar / sc.sigma_c;
            e.jx(0, c) = eps[0] * sc.x_c / sc.u_c;
            e.jy(1, c) = eps[1] * sc.x_c / sc.u_c;
        }
        return e;
    };
}

}  // namespace

TEST_CASE("grid statistics") {
    Vector g(4);
    g << 1.0, -2.0, 3.0, 0.0;
    GridStats s = grid_stats(g);
    CHECK(s.mean == doctest::Approx(0.5));
    CHECK(s.max == 3.0);
    CHECK(s.min == -2.0);
    CHECK_THROWS_AS(grid_stats(Vector()), std::invalid_argument);
}

TEST_CASE("residual report vanishes on the exact analytic solution") {
    ConstantMaterial material(homogeneous(), 2.0);
    ScaleSet sc = ScaleSet::defaults(2.0, 0.025, material);
    Predictor pred = exact_predictor(sc, 0.025, homogeneous());
    ResidualReport rep = residual_report(pred, material, sc, 2.0, 16);

    CHECK(rep.total.max < 1e-12);
    CHECK(rep.div_x.max == 0.0);
    CHECK(std::abs(rep.const_xx.max) < 1e-12);
    CHECK(rep.work_norm < 1e-12);

    // Stats recomputed independently from the exported grids.
    CHECK(rep.total.mean ==
          doctest::Approx(rep.r_total.mean()).epsilon(1e-12));
    CHECK(rep.const_yy.max ==
          doctest::Approx(rep.r_const_yy.maxCoeff()).epsilon(1e-12));
    CHECK(rep.r_total.size() == 16 * 16);
    for (Eigen::Index i = 0; i < rep.r_total.size(); ++i) {
        const double sum = std::abs(rep.r_div_x[i]) + std::abs(rep.r_div_y[i]) +
                           std::abs(rep.r_const_xx[i]) +
                           std::abs(rep.r_const_yy[i]) +
                           std::abs(rep.r_const_xy[i]);
        CHECK(rep.r_total[i] == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("candidate scoring matches the problem-side rule") {
    ConstantMaterial material(homogeneous(), 2.0);
    BvpSpec bvp = BvpSpec::uniaxial(2.0, 0.025, material);
    Topology topo{2, 5, 2, 7, Activation::swish, 1.0};
    CollocationSet points = regular_grid(5, 2.0);
    auto problem = std::make_shared<PinnProblem>(
        topo, bvp.rules, material, bvp.scales, bvp.edge_length,
        points.interior, points.boundary);
    ParamVector p = init_params(topo, 2);

    CollocationSet cand = uniform_random(40, 2.0, 77);
    Vector via_problem =
        problem->pointwise_residual_loss(p, cand.interior, material);

    const double x_c = bvp.scales.x_c;
    Predictor pred = [problem, p, x_c](const Matrix& x) {
        return problem->evaluate_scaled(p, x / x_c);
    };
    Vector via_predictor =
        score_candidates(pred, cand.interior, material, bvp.scales);
    CHECK((via_problem - via_predictor).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("budget sizing reproduces the reference topology") {
    CHECK(units_for_budget(13000, 4, 1) == 64);
    // Four subnets share the same budget.
    const int per_subnet = units_for_budget(13000, 4, 4);
    Topology t;
    t.n_layers = 4;
    t.units_per_layer = per_subnet;
    CHECK(t.param_count() * 4 <= 13000);
    t.units_per_layer = per_subnet + 1;
    CHECK(t.param_count() * 4 > 13000);
    CHECK_THROWS_AS(units_for_budget(0, 4, 1), std::invalid_argument);
}

TEST_CASE("method names") {
    CHECK(to_string(Method::pinn) == "pinn");
    CHECK(to_string(Method::ada_cpinn) == "ada_cpinn");
}

TEST_CASE("convergence study runs a trivial budget without fault") {
    ConstantMaterial material(homogeneous(), 2.0);
    StudyConfig cfg;
    cfg.budgets = {2, 3};
    cfg.eval_side = 8;
    cfg.param_budget = 300;
    cfg.n_layers = 2;
    cfg.bfgs.max_iters = 3;
    StudyResult r = convergence_study(cfg, Method::pinn, material);
    REQUIRE(r.rows.size() == 2);
    for (const StudyRow& row : r.rows) {
        CHECK(row.ok);
        CHECK(std::isfinite(row.mean_r));
        CHECK(row.mean_r > 0.0);
    }
    CHECK(r.method == Method::pinn);
    CHECK_THROWS_AS(convergence_study(StudyConfig{}, Method::pinn, material),
                    std::invalid_argument);
}

TEST_CASE("split study records one row per split and survives failures") {
    ConstantMaterial material(homogeneous(), 2.0);
    StudyConfig cfg;
    cfg.splits = {1, 2};
    cfg.train_side = 5;
    cfg.eval_side = 8;
    cfg.param_budget = 600;
    cfg.n_layers = 2;
    cfg.bfgs.max_iters = 3;
    StudyResult r = split_study(cfg, material);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].key == 1);
    CHECK(r.rows[1].key == 2);
    CHECK(r.rows[0].ok);
    CHECK(r.rows[1].ok);

    // A split too fine for the training grid fails but is recorded.
    cfg.splits = {1, 50};
    StudyResult rf = split_study(cfg, material);
    REQUIRE(rf.rows.size() == 2);
    CHECK(rf.rows[0].ok);
    CHECK(!rf.rows[1].ok);
    CHECK(!rf.rows[1].error.empty());
}

TEST_CASE("trained model predictor agrees with the problem evaluation") {
    ConstantMaterial material(homogeneous(), 2.0);
    StudyConfig cfg;
    cfg.param_budget = 400;
    cfg.n_layers = 2;
    cfg.bfgs.max_iters = 2;
    TrainedModel m = train_model(Method::pinn, cfg, material, 5);
    REQUIRE(m.pinn != nullptr);
    Matrix x(2, 2);
    x << -0.3, 0.4, 0.2, -0.8;
    BatchEval via_pred = m.predictor()(x);
    BatchEval direct = m.pinn->evaluate_scaled(ParamVector{m.theta},
                                               x / m.pinn->scales().x_c);
    CHECK((via_pred.y - direct.y).lpNorm<Eigen::Infinity>() == 0.0);
}
