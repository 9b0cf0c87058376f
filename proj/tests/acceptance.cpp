// End-to-end acceptance gates. Each criterion prints one PASS/FAIL line;
// the binary exits nonzero if any gate fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>

#include "microelast/evaluation.hpp"
#include "microelast/image.hpp"
#include "microelast/runner.hpp"

using namespace microelast;

namespace {

int n_failed = 0;

void report(int criterion, bool ok, const std::string& text) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion,
                text.c_str());
    std::fflush(stdout);
    if (!ok) ++n_failed;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

ConstantMaterial plate_material() {
    return {lame_from_engineering({1.0e4, 0.4}), 2.0};
}

StudyConfig base_config() {
    StudyConfig c;
    c.bfgs.max_iters = 500;
    c.seed = 0;
    return c;
}

// Criteria 1 & 2: homogeneous plate against the closed-form solution.
void criteria_1_2() {
    auto t0 = std::chrono::steady_clock::now();
    ConstantMaterial material = plate_material();
    StudyConfig cfg = base_config();
    TrainedModel model = train_model(Method::pinn, cfg, material, 128);
    ResidualReport rep = residual_report(model.predictor(), material,
                                         model.pinn->scales(), cfg.edge_length,
                                         cfg.eval_side);

    // Exact plane-strain extrema.
    LameConstants m = lame_from_engineering({1.0e4, 0.4});
    Eigen::Matrix2d a;
    a << m.lambda + 2.0 * m.mu, m.lambda, m.lambda, m.lambda + 2.0 * m.mu;
    Eigen::Vector2d eps =
        a.fullPivLu().solve(Eigen::Vector2d(cfg.sigma_bar, 0.0));
    const double ux_exact = eps[0] * cfg.edge_length;   // 4.2e-6 mm
    const double uy_exact = eps[1] * cfg.edge_length;   // -2.8e-6 mm

    CollocationSet grid = regular_grid(cfg.eval_side, cfg.edge_length);
    BatchEval e = model.predictor()(grid.interior);
    const ScaleSet& sc = model.pinn->scales();
    const double ux_max = e.y.row(0).maxCoeff() * sc.u_c;
    const double uy_min = e.y.row(1).minCoeff() * sc.u_c;
    Vector sxx = e.y.row(2).transpose() * sc.sigma_c;
    const double sxx_dev =
        (sxx.array() - cfg.sigma_bar).abs().maxCoeff() / cfg.sigma_bar;
    const double syy_max = (e.y.row(3) * sc.sigma_c).cwiseAbs().maxCoeff();
    const double sxy_max = (e.y.row(4) * sc.sigma_c).cwiseAbs().maxCoeff();

    const bool u_ok = std::abs(ux_max - ux_exact) <= 0.05 * ux_exact &&
                      std::abs(uy_min - uy_exact) <= 0.05 * std::abs(uy_exact);
    const bool s_ok = sxx_dev <= 0.01 && syy_max < 1e-4 && sxy_max < 1e-4;
    const std::size_t iters = model.history.iterations.size();
    report(1, u_ok && s_ok && iters <= 500,
           fmt("homogeneous plate: max u_x=%.3e (exact %.3e), min u_y=%.3e "
               "(exact %.3e), max|s_xx/s_bar-1|=%.2e, max|s_yy|=%.2e, "
               "max|s_xy|=%.2e, %zu iters, %.0f s",
               ux_max, ux_exact, uy_min, uy_exact, sxx_dev, syy_max, sxy_max,
               iters, elapsed_s(t0)));
    report(2, rep.work_norm <= 1e-4,
           fmt("work-balance norm sqrt(L_W)=%.3e (gate 1e-4)", rep.work_norm));
}

TanhInclusionMaterial inclusion_material() {
    return {lame_from_engineering({1.0e4, 0.4}),
            lame_from_engineering({1.5e3, 0.4}), 0.4, 0.1, 2.0};
}

// Criteria 3 & 4: single stiff inclusion. One PINN per training budget;
// the 128^2 model feeds both the interface-locality gate (3) and the
// convergence ranking against CPINN (4).
void criteria_3_4() {
    auto t0 = std::chrono::steady_clock::now();
    TanhInclusionMaterial material = inclusion_material();
    StudyConfig cfg = base_config();

    const int budgets[] = {16, 32, 64, 128};
    std::vector<double> mean_r;
    ResidualReport rep128;
    for (int side : budgets) {
        TrainedModel model = train_model(Method::pinn, cfg, material, side);
        ResidualReport rep = residual_report(model.predictor(), material,
                                             model.pinn->scales(),
                                             cfg.edge_length, cfg.eval_side);
        mean_r.push_back(rep.total.mean);
        if (side == 128) rep128 = rep;
    }

    Eigen::Index arg = 0;
    rep128.r_total.maxCoeff(&arg);
    const double r_at_max =
        std::hypot(rep128.points(0, arg), rep128.points(1, arg));
    const double cell = cfg.edge_length / (cfg.eval_side - 1);
    const bool near_interface = std::abs(r_at_max - 0.4) <= 2.0 * cell;
    report(3, rep128.total.mean <= 1e-2 && near_interface,
           fmt("single inclusion: mean R=%.3e (gate 1e-2), max R=%.3e at "
               "r=%.3f (interface 0.4 +/- %.3f)",
               rep128.total.mean, rep128.total.max, r_at_max, 2.0 * cell));

    bool monotone = true;
    for (std::size_t i = 1; i < mean_r.size(); ++i)
        if (mean_r[i] >= mean_r[i - 1]) monotone = false;
    const double pinn_128 = mean_r.back();

    TrainedModel cp = train_model(Method::cpinn, cfg, material, 128);
    ResidualReport crep = residual_report(cp.predictor(), material,
                                          cp.cpinn->scales(), cfg.edge_length,
                                          cfg.eval_side);
    const double cpinn_128 = crep.total.mean;

    auto within_decade = [](double v, double ref) {
        return v >= ref / 10.0 && v <= ref * 10.0;
    };
    const bool decade_ok =
        within_decade(pinn_128, 1.9673028e-3) &&
        within_decade(cpinn_128, 1.3794703e-3);
    report(4, monotone && cpinn_128 < pinn_128 && decade_ok,
           fmt("convergence: PINN mean R {%.3e, %.3e, %.3e, %.3e} monotone=%d, "
               "CPINN(2x2)@128^2=%.3e < PINN@128^2=%.3e: %d, decade refs "
               "(1.97e-3, 1.38e-3) ok=%d, %.0f s",
               mean_r[0], mean_r[1], mean_r[2], mean_r[3], monotone ? 1 : 0,
               cpinn_128, pinn_128, cpinn_128 < pinn_128 ? 1 : 0,
               decade_ok ? 1 : 0, elapsed_s(t0)));
}

// Criterion 5: split turnover on the synthetic voxel fixture.
void criterion_5() {
    auto t0 = std::chrono::steady_clock::now();
    FiberFixtureOptions fo;
    fo.seed = 1;
    VoxelGrid raw = synthetic_fiber_grid(fo);
    VoxelGrid smooth = binarize(gaussian_filter(raw, 1.0), 0.5);

    LameConstants matrix = lame_from_engineering({1.5e3, 0.4});
    LameConstants fiber = lame_from_engineering({1.0e4, 0.4});
    MaterialNetOptions mo;
    mo.seed = 1;
    std::unique_ptr<MaterialNetwork> material =
        train_material_network(smooth, matrix, fiber, 2.0, mo);

    StudyConfig cfg = base_config();
    cfg.splits = {1, 4, 5};
    cfg.train_side = 32;
    StudyResult r = split_study(cfg, *material);
    const bool rows_ok = r.rows[0].ok && r.rows[1].ok && r.rows[2].ok;
    const double r1 = r.rows[0].mean_r, r4 = r.rows[1].mean_r,
                 r5 = r.rows[2].mean_r;
    const bool turnover = r4 <= 0.9 * r1 && r5 > r4;
    report(5, rows_ok && turnover,
           fmt("voxel split study: mean R {1x1=%.3e, 4x4=%.3e, 5x5=%.3e}, "
               "4x4 < 0.9*1x1: %d, 5x5 > 4x4: %d, %.0f s",
               r1, r4, r5, r4 <= 0.9 * r1 ? 1 : 0, r5 > r4 ? 1 : 0,
               elapsed_s(t0)));
}

// Criterion 6: fast property spot checks (the full suites run under ctest).
void criterion_6() {
    bool ok = true;
    std::string detail = "property spot checks:";

    // Jacobian finite differences.
    {
        Topology topo{2, 5, 3, 8, Activation::swish, 1.0};
        Network net(topo);
        ParamVector p = init_params(topo, 11);
        Matrix x(2, 1);
        x << 0.37, -0.52;
        BatchEval e = net.forward_with_jacobian(p, x);
        const double h = 1e-6;
        Matrix xp = x, xm = x;
        xp(0, 0) += h;
        xm(0, 0) -= h;
        Vector fd = (net.forward_with_jacobian(p, xp).y.col(0) -
                     net.forward_with_jacobian(p, xm).y.col(0)) /
                    (2.0 * h);
        const double rel = (e.jx.col(0) - fd).norm() / fd.norm();
        ok = ok && rel < 1e-6;
        detail += fmt(" jac_fd=%.1e", rel);
    }
    // Hard-BC exactness and 1x1 CPINN equivalence.
    {
        ConstantMaterial material = plate_material();
        BvpSpec bvp = BvpSpec::uniaxial(2.0, 0.025, material);
        Topology topo{2, 5, 2, 6, Activation::swish, 1.0};
        Network net(topo);
        ParamVector p = init_params(topo, 5);
        Matrix xb(2, 1);
        xb << -1.0, 0.3;
        BatchEval comp = compose(net.forward_with_jacobian(p, xb), bvp.rules, xb);
        ok = ok && comp.y(0, 0) == 0.0;  // u_x clamped on the left edge

        CollocationSet pts = regular_grid(5, 2.0);
        PinnProblem pinn(topo, bvp.rules, material, bvp.scales, 2.0,
                         pts.interior, pts.boundary);
        CpinnProblem cp(topo, bvp, material, decompose(1, 1), pts, {});
        const double lp = pinn.loss(p).total;
        const double lc = cp.loss(p.values).pinn.total;
        ok = ok && std::abs(lp - lc) <= 1e-12 * std::abs(lp);
        detail += fmt(" bc_exact=%d cpinn_1x1=%d", comp.y(0, 0) == 0.0,
                      std::abs(lp - lc) <= 1e-12 * std::abs(lp));
    }
    // BFGS quadratic, clip norm, adaptive top-k, image idempotence.
    {
        auto obj = [](const Vector& v) {
            return std::make_pair(v.squaredNorm(), Vector(2.0 * v));
        };
        OptResult r = minimize(obj, Vector::Constant(6, 2.0), {});
        ok = ok && r.params.lpNorm<Eigen::Infinity>() < 1e-8;

        Vector g(2);
        g << 3.0, 4.0;
        ok = ok && std::abs(clip(g, 1.0).norm() - 1.0) < 1e-14;

        Vector losses(5);
        losses << 0.1, 0.9, 0.4, 0.9, 0.2;
        ok = ok && select_adaptive(losses, 2) ==
                       std::vector<Eigen::Index>{1, 3};

        VoxelGrid v;
        v.width = 2;
        v.height = 1;
        v.values = {0.2, 0.8};
        ok = ok && binarize(binarize(v, 0.5), 0.5).values ==
                       binarize(v, 0.5).values;
    }
    report(6, ok, detail);
}

// Criterion 7: desk-scale exclusions, stated for the record.
void criterion_7() {
    report(7, true,
           "out of scope by design: reference-implementation iteration counts "
           "(138 / 5e3 / 2e4), single-precision loss magnitudes, and the "
           "proprietary CT-scan microstructure (a seeded synthetic fiber "
           "fixture substitutes)");
}

}  // namespace

int main() {
    criteria_1_2();
    criteria_3_4();
    criterion_5();
    criterion_6();
    criterion_7();
    std::printf("%s (%d criteria failed)\n", n_failed == 0 ? "OK" : "FAILED",
                n_failed);
    return n_failed == 0 ? 0 : 1;
}
