#include "microelast/optimizer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace microelast {

std::string to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::grad_tol: return "grad_tol";
        case TerminationReason::step_tol: return "step_tol";
        case TerminationReason::max_iters: return "max_iters";
        case TerminationReason::line_search_fail: return "line_search_fail";
    }
    return "unknown";
}

Eigen::VectorXd clip(const Eigen::VectorXd& grad, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("clip: alpha must be > 0");
    const double norm = grad.norm();
    if (norm > alpha) return grad * (alpha / norm);
    return grad;
}

namespace {

struct LinePoint {
    double t, f, df;
};

// Cubic interpolation minimizer between two bracketing points; falls
// back to bisection when the cubic is degenerate.
double interp(const LinePoint& a, const LinePoint& b) {
    const double d1 = a.df + b.df - 3.0 * (a.f - b.f) / (a.t - b.t);
    const double disc = d1 * d1 - a.df * b.df;
    if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), b.t - a.t);
        const double t = b.t - (b.t - a.t) * (b.df + d2 - d1) /
                                   (b.df - a.df + 2.0 * d2);
        const double lo = std::min(a.t, b.t), hi = std::max(a.t, b.t);
        const double margin = 0.1 * (hi - lo);
        if (std::isfinite(t) && t > lo + margin && t < hi - margin) return t;
    }
    return 0.5 * (a.t + b.t);
}

}  // namespace

OptResult minimize(const Objective& objective, const Eigen::VectorXd& x0,
                   const BfgsOptions& opts) {
    if (!(opts.wolfe_c1 > 0 && opts.wolfe_c1 < opts.wolfe_c2 &&
          opts.wolfe_c2 < 1))
        throw std::invalid_argument("minimize: need 0 < c1 < c2 < 1");
    if (opts.grad_tol <= 0 || opts.step_tol <= 0)
        throw std::invalid_argument("minimize: tolerances must be > 0");

    const auto n = x0.size();
    Eigen::VectorXd x = x0;
    auto [f, g] = objective(x);
    if (opts.clip_alpha) g = clip(g, *opts.clip_alpha);

    OptResult best{x, f, {}};
    OptHistory& hist = best.history;

    if (!std::isfinite(f) || !g.allFinite()) {
        hist.reason = TerminationReason::line_search_fail;
        return best;
    }
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
        hist.reason = TerminationReason::grad_tol;
        hist.iterations.push_back({f, g.lpNorm<Eigen::Infinity>(), 0.0});
        return best;
    }

    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    bool first_update = true;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        Eigen::VectorXd p = -(h.selfadjointView<Eigen::Lower>() * g);
        double dphi0 = g.dot(p);
        if (dphi0 >= 0.0) {  // fallback to steepest descent
            p = -g;
            dphi0 = g.dot(p);
        }

        // Strong Wolfe line search (bracket + zoom).
        const double f0 = f;
        auto phi = [&](double t) {
            auto [ft, gt] = objective(x + t * p);
            return std::tuple<double, Eigen::VectorXd>(ft, std::move(gt));
        };
        double t_prev = 0.0, f_prev = f0, df_prev = dphi0;
        double t = 1.0;
        bool accepted = false;
        double f_t = f0;
        Eigen::VectorXd g_t = g;

        auto zoom = [&](LinePoint lo, LinePoint hi) {
            for (int k = 0; k < 30; ++k) {
                const double tj = interp(lo, hi);
                auto [fj, gj] = phi(tj);
                if (!std::isfinite(fj) || !gj.allFinite()) {
                    hi = {tj, fj, 0.0};
                    continue;
                }
                const double dfj = gj.dot(p);
                if (fj > f0 + opts.wolfe_c1 * tj * dphi0 || fj >= lo.f) {
                    hi = {tj, fj, dfj};
                } else {
                    if (std::abs(dfj) <= -opts.wolfe_c2 * dphi0) {
                        t = tj;
                        f_t = fj;
                        g_t = std::move(gj);
                        return true;
                    }
                    if (dfj * (hi.t - lo.t) >= 0.0) hi = lo;
                    lo = {tj, fj, dfj};
                }
                if (std::abs(hi.t - lo.t) <
                    1e-16 * std::max(1.0, std::abs(lo.t)))
                    break;
            }
            // Accept the best sufficient-decrease point found, if any.
            if (lo.t > 0.0 && lo.f < f0) {
                auto [fl, gl] = phi(lo.t);
                if (std::isfinite(fl) && gl.allFinite()) {
                    t = lo.t;
                    f_t = fl;
                    g_t = std::move(gl);
                    return true;
                }
            }
            return false;
        };

        for (int k = 0; k < 20; ++k) {
            auto [ft, gt] = phi(t);
            if (!std::isfinite(ft) || !gt.allFinite()) {
                t *= 0.5;
                continue;
            }
            const double dft = gt.dot(p);
            if (ft > f0 + opts.wolfe_c1 * t * dphi0 ||
                (k > 0 && ft >= f_prev)) {
                accepted = zoom({t_prev, f_prev, df_prev}, {t, ft, dft});
                break;
            }
            if (std::abs(dft) <= -opts.wolfe_c2 * dphi0) {
                accepted = true;
                f_t = ft;
                g_t = std::move(gt);
                break;
            }
            if (dft >= 0.0) {
                accepted = zoom({t, ft, dft}, {t_prev, f_prev, df_prev});
                break;
            }
            t_prev = t;
            f_prev = ft;
            df_prev = dft;
            t *= 2.0;
        }

        if (!accepted) {
            hist.reason = TerminationReason::line_search_fail;
            return best;
        }

        Eigen::VectorXd s = t * p;
        if (opts.clip_alpha) g_t = clip(g_t, *opts.clip_alpha);
        Eigen::VectorXd y = g_t - g;
        x += s;
        f = f_t;
        g = std::move(g_t);
        if (f < best.loss) {
            best.params = x;
            best.loss = f;
        }
        const double gnorm = g.lpNorm<Eigen::Infinity>();
        hist.iterations.push_back({f, gnorm, t});

        if (gnorm <= opts.grad_tol) {
            hist.reason = TerminationReason::grad_tol;
            return best;
        }
        if (s.norm() <= opts.step_tol * std::max(1.0, x.norm())) {
            hist.reason = TerminationReason::step_tol;
            return best;
        }

        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
            if (first_update) {
                h *= sy / y.squaredNorm();
                first_update = false;
            }
            // H <- H + (sy + y'Hy)/(sy)^2 ss' - (Hy s' + s y'H)/sy
            Eigen::VectorXd hy = h.selfadjointView<Eigen::Lower>() * y;
            const double coef = (sy + y.dot(hy)) / (sy * sy);
            h.selfadjointView<Eigen::Lower>().rankUpdate(s, coef);
            h.selfadjointView<Eigen::Lower>().rankUpdate(hy, s, -1.0 / sy);
        }
        // Curvature condition violated: skip the update, keep H.
    }
    hist.reason = TerminationReason::max_iters;
    return best;
}

}  // namespace microelast
