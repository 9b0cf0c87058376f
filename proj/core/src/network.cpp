#include "microelast/network.hpp"

#include <cmath>
#include <random>

namespace microelast {

void Topology::validate() const {
    if (input_dim < 1 || output_dim < 1)
        throw std::invalid_argument("topology: dims must be >= 1");
    if (n_layers < 1) throw std::invalid_argument("topology: n_layers >= 1");
    if (units_per_layer < 1)
        throw std::invalid_argument("topology: units_per_layer >= 1");
    if (beta <= 0.0) throw std::invalid_argument("topology: beta > 0");
}

std::int64_t Topology::param_count() const {
    std::int64_t n = 0;
    for (int l = 0; l < matrix_count(); ++l)
        n += static_cast<std::int64_t>(fan_out(l)) * (fan_in(l) + 1);
    return n;
}

namespace {

std::int64_t layer_offset(const Topology& topo, int l) {
    std::int64_t off = 0;
    for (int k = 0; k < l; ++k)
        off += static_cast<std::int64_t>(topo.fan_out(k)) * (topo.fan_in(k) + 1);
    return off;
}

// Activation value together with first and second derivative, applied
// element-wise.
struct ActEval {
    Matrix h, d1, d2;
};

ActEval activate(Activation act, double beta, const Matrix& z) {
    ActEval r;
    switch (act) {
        case Activation::identity:
            r.h = z;
            r.d1 = Matrix::Ones(z.rows(), z.cols());
            r.d2 = Matrix::Zero(z.rows(), z.cols());
            return r;
        case Activation::tanh: {
            Matrix t = z.array().tanh().matrix();
            r.h = t;
            r.d1 = (1.0 - t.array().square()).matrix();
            r.d2 = (-2.0 * t.array() * (1.0 - t.array().square())).matrix();
            return r;
        }
        case Activation::sigmoid: {
            // The printed variant: phi(z) = 1/(1+exp(-beta z)).
            Matrix s = (1.0 / (1.0 + (-beta * z.array()).exp())).matrix();
            r.h = s;
            r.d1 = (beta * s.array() * (1.0 - s.array())).matrix();
            r.d2 = (beta * beta * s.array() * (1.0 - s.array()) *
                    (1.0 - 2.0 * s.array()))
                       .matrix();
            return r;
        }
        case Activation::swish: {
            // phi(z) = z * sigmoid(beta z)
            Eigen::ArrayXXd s = 1.0 / (1.0 + (-beta * z.array()).exp());
            Eigen::ArrayXXd sp = beta * s * (1.0 - s);
            r.h = (z.array() * s).matrix();
            r.d1 = (s + z.array() * sp).matrix();
            r.d2 = (2.0 * sp + z.array() * beta * sp * (1.0 - 2.0 * s)).matrix();
            return r;
        }
    }
    throw std::logic_error("unreachable activation");
}

}  // namespace

Eigen::Map<const Matrix> ParamVector::layer(const Topology& topo, int l) const {
    return {values.data() + layer_offset(topo, l), topo.fan_out(l),
            topo.fan_in(l) + 1};
}

Eigen::Map<Matrix> ParamVector::layer(const Topology& topo, int l) {
    return {values.data() + layer_offset(topo, l), topo.fan_out(l),
            topo.fan_in(l) + 1};
}

ParamVector zero_params(const Topology& topo) {
    topo.validate();
    return {Vector::Zero(topo.param_count())};
}

ParamVector init_params(const Topology& topo, std::uint64_t seed) {
    topo.validate();
    ParamVector p = zero_params(topo);
    std::mt19937_64 rng(seed);
    for (int l = 0; l < topo.matrix_count(); ++l) {
        const double limit =
            std::sqrt(6.0 / (topo.fan_in(l) + topo.fan_out(l)));
        std::uniform_real_distribution<double> dist(-limit, limit);
        auto w = p.layer(topo, l);
        // Fill the weight block in a fixed (row, col) order; the bias
        // column stays zero.
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols() - 1; ++j) w(i, j) = dist(rng);
    }
    return p;
}

Network::Network(Topology topo) : topo_(std::move(topo)) { topo_.validate(); }

Matrix Network::forward(const ParamVector& params, const Matrix& x) const {
    if (x.rows() != topo_.input_dim)
        throw std::invalid_argument("forward: input dim mismatch");
    Matrix a = x;
    for (int l = 0; l < topo_.matrix_count(); ++l) {
        auto w = params.layer(topo_, l);
        Matrix z = w.leftCols(w.cols() - 1) * a;
        z.colwise() += w.col(w.cols() - 1);
        if (!z.allFinite())
            throw std::runtime_error("forward: non-finite value at layer " +
                                     std::to_string(l));
        Activation act =
            l == topo_.n_layers ? Activation::identity : topo_.activation;
        a = activate(act, topo_.beta, z).h;
    }
    return a;
}

BatchEval Network::forward_with_jacobian(const ParamVector& params,
                                         const Matrix& x,
                                         ForwardTape* tape) const {
    if (x.rows() != topo_.input_dim)
        throw std::invalid_argument("forward_with_jacobian: input dim mismatch");
    const auto n = x.cols();
    Matrix a = x;
    Matrix axp = Matrix::Zero(topo_.input_dim, n);
    Matrix ayp = Matrix::Zero(topo_.input_dim, n);
    axp.row(0).setOnes();
    ayp.row(1).setOnes();
    if (tape) {
        const int m = topo_.matrix_count();
        tape->a.resize(m);
        tape->ax.resize(m);
        tape->ay.resize(m);
        tape->z.resize(m);
        tape->tx.resize(m);
        tape->ty.resize(m);
    }
    for (int l = 0; l < topo_.matrix_count(); ++l) {
        auto w = params.layer(topo_, l);
        auto wa = w.leftCols(w.cols() - 1);
        Matrix z = wa * a;
        z.colwise() += w.col(w.cols() - 1);
        Matrix tx = wa * axp;
        Matrix ty = wa * ayp;
        if (!z.allFinite())
            throw std::runtime_error("forward: non-finite value at layer " +
                                     std::to_string(l));
        if (tape) {
            tape->a[l] = std::move(a);
            tape->ax[l] = std::move(axp);
            tape->ay[l] = std::move(ayp);
            tape->z[l] = z;
            tape->tx[l] = tx;
            tape->ty[l] = ty;
        }
        Activation act =
            l == topo_.n_layers ? Activation::identity : topo_.activation;
        ActEval e = activate(act, topo_.beta, z);
        a = std::move(e.h);
        axp = (e.d1.array() * tx.array()).matrix();
        ayp = (e.d1.array() * ty.array()).matrix();
    }
    return {std::move(a), std::move(axp), std::move(ayp)};
}

JacobianSample Network::eval(const ParamVector& params,
                             const Eigen::Vector2d& x) const {
    BatchEval e = forward_with_jacobian(params, x);
    JacobianSample s;
    s.x = x;
    s.y = e.y.col(0);
    s.dy_dx.resize(topo_.output_dim, 2);
    s.dy_dx.col(0) = e.jx.col(0);
    s.dy_dx.col(1) = e.jy.col(0);
    return s;
}

void Network::backward(const ParamVector& params, const ForwardTape& tape,
                       const Matrix& ybar, const Matrix& jxbar,
                       const Matrix& jybar, Vector& grad) const {
    if (grad.size() != topo_.param_count())
        throw std::invalid_argument("backward: grad size mismatch");
    Matrix hbar = ybar, gxbar = jxbar, gybar = jybar;
    for (int l = topo_.matrix_count() - 1; l >= 0; --l) {
        auto w = params.layer(topo_, l);
        auto wa = w.leftCols(w.cols() - 1);
        Activation act =
            l == topo_.n_layers ? Activation::identity : topo_.activation;
        ActEval e = activate(act, topo_.beta, tape.z[l]);

        // Adjoints of the pre-activation z and of its tangents tx, ty.
        Matrix sx = (e.d1.array() * gxbar.array()).matrix();
        Matrix sy = (e.d1.array() * gybar.array()).matrix();
        Matrix zbar =
            (e.d1.array() * hbar.array() +
             e.d2.array() * (gxbar.array() * tape.tx[l].array() +
                             gybar.array() * tape.ty[l].array()))
                .matrix();

        Eigen::Map<Matrix> g(grad.data() + layer_offset(topo_, l),
                             topo_.fan_out(l), topo_.fan_in(l) + 1);
        g.leftCols(g.cols() - 1) += zbar * tape.a[l].transpose() +
                                    sx * tape.ax[l].transpose() +
                                    sy * tape.ay[l].transpose();
        g.col(g.cols() - 1) += zbar.rowwise().sum();

        if (l > 0) {
            hbar = wa.transpose() * zbar;
            gxbar = wa.transpose() * sx;
            gybar = wa.transpose() * sy;
        }
    }
}

std::pair<double, Vector> loss_gradient(const Network& net,
                                        const ParamVector& params,
                                        const Matrix& x, const LossFn& loss) {
    ForwardTape tape;
    BatchEval eval = net.forward_with_jacobian(params, x, &tape);
    const auto& topo = net.topology();
    Matrix ybar = Matrix::Zero(topo.output_dim, x.cols());
    Matrix jxbar = Matrix::Zero(topo.output_dim, x.cols());
    Matrix jybar = Matrix::Zero(topo.output_dim, x.cols());
    double value = loss(eval, ybar, jxbar, jybar);
    Vector grad = Vector::Zero(topo.param_count());
    net.backward(params, tape, ybar, jxbar, jybar, grad);
    return {value, std::move(grad)};
}

}  // namespace microelast
