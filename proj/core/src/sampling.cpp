#include "microelast/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace microelast {

CollocationSet regular_grid(int n_per_side, double edge_length) {
    if (n_per_side < 2)
        throw std::invalid_argument("regular_grid: n_per_side >= 2");
    const double half = 0.5 * edge_length;
    const double step = edge_length / (n_per_side - 1);
    CollocationSet set;
    set.provenance = Provenance::regular;
    set.interior.resize(2, static_cast<Eigen::Index>(n_per_side) * n_per_side);
    Eigen::Index k = 0;
    for (int i = 0; i < n_per_side; ++i)
        for (int j = 0; j < n_per_side; ++j, ++k)
            set.interior.col(k) =
                Eigen::Vector2d(-half + i * step, -half + j * step);
    set.boundary = loaded_edge_points(n_per_side, edge_length);
    set.boundary_edges.assign(n_per_side, EdgeLabel::right);
    return set;
}

CollocationSet uniform_random(int n, double edge_length, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("uniform_random: n >= 1");
    const double half = 0.5 * edge_length;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-half, half);
    CollocationSet set;
    set.provenance = Provenance::random;
    set.interior.resize(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = dist(rng);
        const double y = dist(rng);
        set.interior.col(i) = Eigen::Vector2d(x, y);
    }
    return set;
}

Matrix loaded_edge_points(int n_b, double edge_length) {
    if (n_b < 2) throw std::invalid_argument("loaded_edge_points: n_b >= 2");
    const double half = 0.5 * edge_length;
    Matrix pts(2, n_b);
    const double step = edge_length / (n_b - 1);
    for (int j = 0; j < n_b; ++j)
        pts.col(j) = Eigen::Vector2d(half, -half + j * step);
    return pts;
}

std::vector<Eigen::Index> select_adaptive(const Vector& pointwise_loss,
                                          int n_ada) {
    if (n_ada > pointwise_loss.size())
        throw std::invalid_argument("select_adaptive: n_ada > candidates");
    if (!pointwise_loss.allFinite())
        throw std::invalid_argument("select_adaptive: non-finite loss");
    std::vector<Eigen::Index> idx(pointwise_loss.size());
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                         return pointwise_loss[a] > pointwise_loss[b];
                     });
    idx.resize(n_ada);
    return idx;
}

Matrix combine_points(const Matrix& regular, const Matrix& adaptive) {
    Matrix out(2, regular.cols() + adaptive.cols());
    out << regular, adaptive;
    return out;
}

void AdaptiveConfig::validate() const {
    if (n_fine < 0 || n_iter < 0 || cycle_iters < 0)
        throw std::invalid_argument("adaptive: negative iteration counts");
    if (n_iter > 0) {
        if (n_ada < 1 || n_rand < n_ada)
            throw std::invalid_argument("adaptive: need 1 <= n_ada <= n_rand");
        if (n_reg < 1) throw std::invalid_argument("adaptive: n_reg >= 1");
        if (gamma > 0.0 &&
            std::abs(gamma - static_cast<double>(n_reg) / n_ada) > 1e-6)
            throw std::invalid_argument("adaptive: gamma != n_reg / n_ada");
        if (alpha <= 0.0) throw std::invalid_argument("adaptive: alpha > 0");
    }
}

AdaptiveRunResult adaptive_loop(const ProblemFactory& make_problem,
                                const MaterialField& material,
                                const CollocationSet& fine_set,
                                const ParamVector& params0,
                                const AdaptiveConfig& config,
                                const BfgsOptions& base_opts,
                                double edge_length) {
    config.validate();
    AdaptiveRunResult result;
    result.params = params0;

    // Fine-grid phase, unclipped.
    if (config.n_fine > 0) {
        auto problem = make_problem(fine_set.interior);
        BfgsOptions opts = base_opts;
        opts.max_iters = config.n_fine;
        opts.clip_alpha.reset();
        auto objective = [&](const Vector& theta) {
            auto [b, g] = problem->loss_and_grad(ParamVector{theta});
            return std::make_pair(b.total, std::move(g));
        };
        OptResult r = minimize(objective, result.params.values, opts);
        result.params.values = r.params;
        result.fine_history = std::move(r.history);
    }

    const int side = std::max(2, static_cast<int>(std::lround(
                                     std::sqrt(static_cast<double>(config.n_reg)))));
    for (int cycle = 0; cycle < config.n_iter; ++cycle) {
        CollocationSet sparse = regular_grid(side, edge_length);
        CollocationSet rand = uniform_random(config.n_rand, edge_length,
                                             config.seed + 0x9e3779b9ull * cycle);

        auto scoring = make_problem(fine_set.interior);
        Vector losses = scoring->pointwise_residual_loss(
            result.params, rand.interior, material);
        std::vector<Eigen::Index> keep = select_adaptive(losses, config.n_ada);
        Matrix ada(2, keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i)
            ada.col(static_cast<Eigen::Index>(i)) = rand.interior.col(keep[i]);

        CollocationSet combined;
        combined.provenance = Provenance::combined;
        combined.interior = combine_points(sparse.interior, ada);
        combined.boundary = sparse.boundary;
        combined.boundary_edges = sparse.boundary_edges;

        auto problem = make_problem(combined.interior);
        BfgsOptions opts = base_opts;
        opts.max_iters = config.cycle_iters;
        opts.clip_alpha = config.alpha;
        auto objective = [&](const Vector& theta) {
            auto [b, g] = problem->loss_and_grad(ParamVector{theta});
            return std::make_pair(b.total, std::move(g));
        };
        OptResult r = minimize(objective, result.params.values, opts);
        result.params.values = r.params;
        result.cycles.push_back({std::move(combined), r.loss});
    }
    return result;
}

}  // namespace microelast
