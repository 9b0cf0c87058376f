#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "microelast/optimizer.hpp"

using namespace microelast;
using Eigen::VectorXd;

TEST_CASE("BFGS solves an SPD quadratic to the exact minimizer") {
    const int n = 12;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = dist(rng);
    Eigen::MatrixXd a = m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = dist(rng);

    auto objective = [&](const VectorXd& x) {
        return std::make_pair(0.5 * x.dot(a * x) - b.dot(x),
                              VectorXd(a * x - b));
    };
    BfgsOptions opts;
    opts.max_iters = 60;
    OptResult r = minimize(objective, VectorXd::Zero(n), opts);
    VectorXd exact = a.fullPivLu().solve(b);
    CHECK((r.params - exact).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(r.history.iterations.size() <= 60);
    CHECK(r.history.reason == TerminationReason::grad_tol);
}

TEST_CASE("BFGS minimizes the Rosenbrock function") {
    auto objective = [](const VectorXd& x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        VectorXd g(2);
        g[0] = -2.0 * a - 400.0 * x[0] * b;
        g[1] = 200.0 * b;
        return std::make_pair(a * a + 100.0 * b * b, g);
    };
    VectorXd x0(2);
    x0 << -1.2, 1.0;
    BfgsOptions opts;
    opts.max_iters = 200;
    OptResult r = minimize(objective, x0, opts);
    CHECK(r.loss < 1e-12);
    CHECK(std::abs(r.params[0] - 1.0) < 1e-5);
    CHECK(std::abs(r.params[1] - 1.0) < 1e-5);
}

TEST_CASE("iteration history is monotone under strong Wolfe steps") {
    auto objective = [](const VectorXd& x) {
        return std::make_pair(x.squaredNorm() + std::sin(x[0]),
                              VectorXd(2.0 * x + VectorXd::Unit(x.size(), 0) *
                                                     std::cos(x[0])));
    };
    VectorXd x0 = VectorXd::Constant(4, 2.0);
    BfgsOptions opts;
    opts.max_iters = 50;
    OptResult r = minimize(objective, x0, opts);
    for (std::size_t i = 1; i < r.history.iterations.size(); ++i)
        CHECK(r.history.iterations[i].loss <=
              r.history.iterations[i - 1].loss + 1e-14);
}

TEST_CASE("max_iters is respected") {
    // Non-quadratic objective: the line search cannot land exactly on
    // the minimizer, so the gradient tolerance never triggers early.
    auto objective = [](const VectorXd& x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        VectorXd g(2);
        g[0] = -2.0 * a - 400.0 * x[0] * b;
        g[1] = 200.0 * b;
        return std::make_pair(a * a + 100.0 * b * b, g);
    };
    BfgsOptions opts;
    opts.max_iters = 3;
    opts.grad_tol = 1e-300;
    opts.step_tol = 1e-300;
    VectorXd x0(2);
    x0 << -1.2, 1.0;
    OptResult r = minimize(objective, x0, opts);
    CHECK(r.history.iterations.size() == 3);
    CHECK(r.history.reason == TerminationReason::max_iters);
}

TEST_CASE("non-finite evaluations stop with the best point seen") {
    auto objective = [](const VectorXd& x) {
        const double v = x[0] < -5.0
                             ? std::numeric_limits<double>::quiet_NaN()
                             : (x[0] + 4.0) * (x[0] + 4.0);
        VectorXd g(1);
        g[0] = 2.0 * (x[0] + 4.0);
        return std::make_pair(v, g);
    };
    BfgsOptions opts;
    opts.max_iters = 100;
    OptResult r = minimize(objective, VectorXd::Constant(1, 10.0), opts);
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss <= 196.0);  // no worse than the start
}

TEST_CASE("gradient clipping caps the norm at alpha") {
    VectorXd g(3);
    g << 3.0, 4.0, 0.0;
    VectorXd clipped = clip(g, 1.0);
    CHECK(clipped.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(clipped.isApprox(g / 5.0));
    // Below the threshold the gradient passes through unchanged.
    CHECK(clip(g, 10.0).isApprox(g));

    // Clipped optimization still reaches the quadratic minimizer.
    auto objective = [](const VectorXd& x) {
        return std::make_pair(x.squaredNorm(), VectorXd(2.0 * x));
    };
    BfgsOptions opts;
    opts.max_iters = 100;
    opts.clip_alpha = 0.5;
    OptResult r = minimize(objective, VectorXd::Constant(4, 3.0), opts);
    CHECK(r.params.lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("termination reason strings") {
    CHECK(to_string(TerminationReason::grad_tol) == "grad_tol");
    CHECK(to_string(TerminationReason::step_tol) == "step_tol");
    CHECK(to_string(TerminationReason::max_iters) == "max_iters");
    CHECK(to_string(TerminationReason::line_search_fail) ==
          "line_search_fail");
}
