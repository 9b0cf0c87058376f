#include "microelast/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace microelast {

namespace {
constexpr int UX = 0, UY = 1, SXX = 2, SYY = 3, SXY = 4;
constexpr double kOwnTol = 1e-12;
}  // namespace

int Decomposition::box_of(double x, double y) const {
    if (x < -1.0 - kOwnTol || x > 1.0 + kOwnTol || y < -1.0 - kOwnTol ||
        y > 1.0 + kOwnTol)
        throw std::out_of_range("decomposition: point outside domain");
    const double wx = 2.0 / nx, wy = 2.0 / ny;
    auto cell = [](double v, double w, int n) {
        int i = static_cast<int>(std::floor((v + 1.0) / w));
        i = std::clamp(i, 0, n - 1);
        // Points exactly on an interior interface belong to the
        // lower-index box.
        if (i > 0 && std::abs(v - (-1.0 + i * w)) <= kOwnTol) --i;
        return i;
    };
    return cell(y, wy, ny) * nx + cell(x, wx, nx);
}

Decomposition decompose(int nx, int ny) {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("decompose: splits must be >= 1");
    Decomposition d;
    d.nx = nx;
    d.ny = ny;
    const double wx = 2.0 / nx, wy = 2.0 / ny;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            d.boxes.push_back({-1.0 + i * wx, -1.0 + (i + 1) * wx,
                               -1.0 + j * wy, -1.0 + (j + 1) * wy});
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = j * nx + i;
            if (i + 1 < nx) {  // vertical interface with right neighbor
                const double x = -1.0 + (i + 1) * wx;
                d.interfaces.push_back({a, a + 1, true,
                                        {x, -1.0 + j * wy},
                                        {x, -1.0 + (j + 1) * wy}});
            }
            if (j + 1 < ny) {  // horizontal interface with upper neighbor
                const double y = -1.0 + (j + 1) * wy;
                d.interfaces.push_back({a, a + nx, false,
                                        {-1.0 + i * wx, y},
                                        {-1.0 + (i + 1) * wx, y}});
            }
        }
    }
    return d;
}

CpinnProblem::CpinnProblem(Topology subnet_topo, const BvpSpec& bvp,
                           const MaterialField& material,
                           const Decomposition& decomp,
                           const CollocationSet& points,
                           const CpinnOptions& opts)
    : topo_(std::move(subnet_topo)), scales_(bvp.scales),
      edge_length_(bvp.edge_length), psi_(opts.psi),
      interface_full_(opts.interface_full), decomp_(decomp) {
    scales_.validate();
    topo_.validate();
    const int n_boxes = static_cast<int>(decomp_.boxes.size());
    rules_.reserve(n_boxes);
    for (const Box& box : decomp_.boxes)
        rules_.push_back(subdomain_rules(bvp.rules, box));

    // Partition interior and loaded-edge points by owning box.
    std::vector<std::vector<Eigen::Vector2d>> interior(n_boxes), bnd(n_boxes);
    for (Eigen::Index c = 0; c < points.interior.cols(); ++c) {
        const Eigen::Vector2d p = points.interior.col(c) / scales_.x_c;
        interior[decomp_.box_of(p.x(), p.y())].push_back(p);
    }
    for (Eigen::Index c = 0; c < points.boundary.cols(); ++c) {
        const Eigen::Vector2d p = points.boundary.col(c) / scales_.x_c;
        bnd[decomp_.box_of(p.x(), p.y())].push_back(p);
    }
    n_boundary_total_ = points.boundary.cols();

    x_int_.resize(n_boxes);
    x_bnd_.resize(n_boxes);
    lambda_hat_.resize(n_boxes);
    mu_hat_.resize(n_boxes);
    for (int i = 0; i < n_boxes; ++i) {
        if (interior[i].empty())
            throw std::invalid_argument(
                "cpinn: subdomain without interior points");
        x_int_[i].resize(2, static_cast<Eigen::Index>(interior[i].size()));
        for (std::size_t k = 0; k < interior[i].size(); ++k)
            x_int_[i].col(static_cast<Eigen::Index>(k)) = interior[i][k];
        x_bnd_[i].resize(2, static_cast<Eigen::Index>(bnd[i].size()));
        for (std::size_t k = 0; k < bnd[i].size(); ++k)
            x_bnd_[i].col(static_cast<Eigen::Index>(k)) = bnd[i][k];
        lambda_hat_[i].resize(x_int_[i].cols());
        mu_hat_[i].resize(x_int_[i].cols());
        for (Eigen::Index k = 0; k < x_int_[i].cols(); ++k) {
            LameConstants lame =
                material.query(x_int_[i].col(k) * scales_.x_c);
            lambda_hat_[i][k] = lame.lambda / scales_.lambda_c;
            mu_hat_[i][k] = lame.mu / scales_.mu_c;
        }
    }

    // Interface collocation: uniform interior spacing, endpoints
    // excluded to avoid corner triple-ownership.
    int m = opts.points_per_interface;
    if (m <= 0) {
        const double per_box =
            static_cast<double>(points.interior.cols()) / n_boxes;
        m = std::max(2, static_cast<int>(std::lround(std::sqrt(per_box))));
    }
    for (const auto& f : decomp_.interfaces) {
        Matrix pts(2, m);
        for (int k = 0; k < m; ++k) {
            const double t = (k + 1.0) / (m + 1.0);
            pts.col(k) = f.p0 + t * (f.p1 - f.p0);
        }
        x_iface_.push_back(std::move(pts));
    }
}

Vector CpinnProblem::init_params(std::uint64_t seed) const {
    Vector theta(param_count());
    const auto np = topo_.param_count();
    for (int i = 0; i < n_subnets(); ++i)
        theta.segment(i * np, np) =
            microelast::init_params(topo_, seed + static_cast<std::uint64_t>(i))
                .values;
    return theta;
}

Eigen::Map<const Vector> CpinnProblem::subnet_params(const Vector& theta,
                                                     int i) const {
    const auto np = topo_.param_count();
    return {theta.data() + i * np, np};
}

CpinnProblem::CpinnLoss CpinnProblem::loss(const Vector& theta) const {
    return loss_impl(theta, nullptr);
}

std::pair<CpinnProblem::CpinnLoss, Vector> CpinnProblem::loss_and_grad(
    const Vector& theta) const {
    Vector grad = Vector::Zero(param_count());
    CpinnLoss l = loss_impl(theta, &grad);
    return {l, std::move(grad)};
}

CpinnProblem::CpinnLoss CpinnProblem::loss_impl(const Vector& theta,
                                                Vector* grad) const {
    if (theta.size() != param_count())
        throw std::invalid_argument("cpinn: parameter size mismatch");
    const int n_boxes = n_subnets();
    Network net(topo_);

    struct SubnetBatch {
        Matrix x;
        ForwardTape tape;
        BatchEval raw, comp;
        Matrix ybar, jxbar, jybar;
        Eigen::Index n_int, n_bnd;
        std::vector<Eigen::Index> iface_offset;  // per interface id, -1 if absent
    };
    std::vector<SubnetBatch> batches(n_boxes);

    for (int i = 0; i < n_boxes; ++i) {
        SubnetBatch& sb = batches[i];
        sb.n_int = x_int_[i].cols();
        sb.n_bnd = x_bnd_[i].cols();
        sb.iface_offset.assign(decomp_.interfaces.size(), -1);
        Eigen::Index total = sb.n_int + sb.n_bnd;
        for (std::size_t f = 0; f < decomp_.interfaces.size(); ++f) {
            const auto& itf = decomp_.interfaces[f];
            if (itf.a == i || itf.b == i) {
                sb.iface_offset[f] = total;
                total += x_iface_[f].cols();
            }
        }
        sb.x.resize(2, total);
        sb.x.leftCols(sb.n_int) = x_int_[i];
        sb.x.middleCols(sb.n_int, sb.n_bnd) = x_bnd_[i];
        for (std::size_t f = 0; f < decomp_.interfaces.size(); ++f)
            if (sb.iface_offset[f] >= 0)
                sb.x.middleCols(sb.iface_offset[f], x_iface_[f].cols()) =
                    x_iface_[f];

        ParamVector p{subnet_params(theta, i)};
        sb.raw = net.forward_with_jacobian(p, sb.x, grad ? &sb.tape : nullptr);
        sb.comp = compose(sb.raw, rules_[i], sb.x);
        if (grad) {
            sb.ybar = Matrix::Zero(kNumOutputs, total);
            sb.jxbar = Matrix::Zero(kNumOutputs, total);
            sb.jybar = Matrix::Zero(kNumOutputs, total);
        }
    }

    CpinnLoss out;
    const double kl = scales_.kappa_lambda(), km = scales_.kappa_mu();

    // Residual terms, per subnet over its own interior points.
    for (int i = 0; i < n_boxes; ++i) {
        SubnetBatch& sb = batches[i];
        LossBreakdown b = residual_terms_adjoint(
            sb.comp, 0, sb.n_int, lambda_hat_[i], mu_hat_[i], kl, km,
            grad ? &sb.ybar : nullptr, grad ? &sb.jxbar : nullptr,
            grad ? &sb.jybar : nullptr);
        out.pinn.l_div_x += b.l_div_x;
        out.pinn.l_div_y += b.l_div_y;
        out.pinn.l_const_xx += b.l_const_xx;
        out.pinn.l_const_yy += b.l_const_yy;
        out.pinn.l_const_xy += b.l_const_xy;
    }

    // Global work balance over the union of the subdomains.
    const double bw = 1.0 / static_cast<double>(n_boundary_total_);
    double s = 0.0;
    std::vector<double> cw(n_boxes);
    for (int i = 0; i < n_boxes; ++i) {
        const Box& box = decomp_.boxes[i];
        const double area = (box.x_max - box.x_min) * (box.y_max - box.y_min);
        cw[i] = area / (2.0 * static_cast<double>(batches[i].n_int));
        s += work_interior_sum(batches[i].comp, 0, batches[i].n_int, cw[i]);
        if (batches[i].n_bnd > 0)
            s -= work_boundary_sum(batches[i].comp, batches[i].n_int,
                                   batches[i].n_bnd, bw);
    }
    out.pinn.l_work = s * s;
    if (grad) {
        for (int i = 0; i < n_boxes; ++i) {
            SubnetBatch& sb = batches[i];
            work_interior_adjoint(sb.comp, 0, sb.n_int, 2.0 * s * cw[i],
                                  sb.ybar, sb.jxbar, sb.jybar);
            if (sb.n_bnd > 0)
                work_boundary_adjoint(sb.comp, sb.n_int, sb.n_bnd,
                                      -2.0 * s * bw, sb.ybar);
        }
    }

    // Interface penalties: displacement and traction-component
    // mismatch, orientation-assigned, mean-squared per segment.
    for (std::size_t f = 0; f < decomp_.interfaces.size(); ++f) {
        const auto& itf = decomp_.interfaces[f];
        SubnetBatch& sa = batches[itf.a];
        SubnetBatch& sb = batches[itf.b];
        const Eigen::Index oa = sa.iface_offset[f], ob = sb.iface_offset[f];
        const Eigen::Index m = x_iface_[f].cols();
        std::vector<int> outputs;
        if (itf.vertical) {
            outputs = {UY, SYY, SXY};
            if (interface_full_) outputs.push_back(UX);
        } else {
            outputs = {UX, SXX, SXY};
            if (interface_full_) outputs.push_back(UY);
        }
        const double inv_m = 1.0 / static_cast<double>(m);
        for (int o : outputs) {
            double term = 0.0;
            for (Eigen::Index k = 0; k < m; ++k) {
                const double d =
                    sa.comp.y(o, oa + k) - sb.comp.y(o, ob + k);
                term += d * d * inv_m;
                if (grad) {
                    const double w = psi_ * 2.0 * d * inv_m;
                    sa.ybar(o, oa + k) += w;
                    sb.ybar(o, ob + k) -= w;
                }
            }
            out.interface += psi_ * term;
        }
    }

    out.pinn.finalize();
    out.total = out.pinn.total + out.interface;

    if (grad) {
        const auto np = topo_.param_count();
        for (int i = 0; i < n_boxes; ++i) {
            SubnetBatch& sb = batches[i];
            compose_backward(rules_[i], sb.x, sb.raw, sb.ybar, sb.jxbar,
                             sb.jybar);
            ParamVector p{subnet_params(theta, i)};
            Vector gseg = Vector::Zero(np);
            net.backward(p, sb.tape, sb.ybar, sb.jxbar, sb.jybar, gseg);
            grad->segment(i * np, np) = gseg;
        }
    }
    return out;
}

double CpinnProblem::interface_defect(const Vector& theta) const {
    Network net(topo_);
    double sum = 0.0;
    Eigen::Index count = 0;
    for (std::size_t f = 0; f < decomp_.interfaces.size(); ++f) {
        const auto& itf = decomp_.interfaces[f];
        ParamVector pa{subnet_params(theta, itf.a)};
        ParamVector pb{subnet_params(theta, itf.b)};
        BatchEval ea = compose(net.forward_with_jacobian(pa, x_iface_[f]),
                               rules_[itf.a], x_iface_[f]);
        BatchEval eb = compose(net.forward_with_jacobian(pb, x_iface_[f]),
                               rules_[itf.b], x_iface_[f]);
        for (Eigen::Index k = 0; k < x_iface_[f].cols(); ++k) {
            const double dx = ea.y(UX, k) - eb.y(UX, k);
            const double dy = ea.y(UY, k) - eb.y(UY, k);
            sum += std::hypot(dx, dy);
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

BatchEval CpinnProblem::predict(const Vector& theta,
                                const Matrix& x_physical) const {
    Network net(topo_);
    const Eigen::Index n = x_physical.cols();
    std::vector<std::vector<Eigen::Index>> owned(decomp_.boxes.size());
    for (Eigen::Index c = 0; c < n; ++c) {
        const Eigen::Vector2d p = x_physical.col(c) / scales_.x_c;
        owned[decomp_.box_of(p.x(), p.y())].push_back(c);
    }
    BatchEval out;
    out.y = Matrix::Zero(kNumOutputs, n);
    out.jx = Matrix::Zero(kNumOutputs, n);
    out.jy = Matrix::Zero(kNumOutputs, n);
    for (std::size_t i = 0; i < owned.size(); ++i) {
        if (owned[i].empty()) continue;
        Matrix xs(2, static_cast<Eigen::Index>(owned[i].size()));
        for (std::size_t k = 0; k < owned[i].size(); ++k)
            xs.col(static_cast<Eigen::Index>(k)) =
                x_physical.col(owned[i][k]) / scales_.x_c;
        ParamVector p{subnet_params(theta, static_cast<int>(i))};
        BatchEval e =
            compose(net.forward_with_jacobian(p, xs), rules_[i], xs);
        for (std::size_t k = 0; k < owned[i].size(); ++k) {
            const auto c = owned[i][k];
            out.y.col(c) = e.y.col(static_cast<Eigen::Index>(k));
            out.jx.col(c) = e.jx.col(static_cast<Eigen::Index>(k));
            out.jy.col(c) = e.jy.col(static_cast<Eigen::Index>(k));
        }
    }
    return out;
}

}  // namespace microelast
