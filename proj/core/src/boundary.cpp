#include "microelast/boundary.hpp"

namespace microelast {

Poly2 Poly2::constant(double v) {
    Poly2 p;
    p.c(0, 0) = v;
    return p;
}

double Poly2::value(double x, double y) const {
    const Eigen::Vector3d px(1.0, x, x * x), py(1.0, y, y * y);
    return px.dot(c * py);
}

double Poly2::dx(double x, double y) const {
    const Eigen::Vector3d px(0.0, 1.0, 2.0 * x), py(1.0, y, y * y);
    return px.dot(c * py);
}

double Poly2::dy(double x, double y) const {
    const Eigen::Vector3d px(1.0, x, x * x), py(0.0, 1.0, 2.0 * y);
    return px.dot(c * py);
}

namespace {

Poly2 linear(double c0, double cx, double cy) {
    Poly2 p;
    p.c(0, 0) = c0;
    p.c(1, 0) = cx;
    p.c(0, 1) = cy;
    return p;
}

// (1 - x)^2 (1 - y)^2
Poly2 printed_shear_distance() {
    Poly2 p;
    const Eigen::Vector3d q(1.0, -2.0, 1.0);  // (1 - t)^2 coefficients
    p.c = q * q.transpose();
    return p;
}

// (1 - x^2)(1 - y^2), zero on all four edges
Poly2 corrected_shear_distance() {
    Poly2 p;
    const Eigen::Vector3d q(1.0, 0.0, -1.0);
    p.c = q * q.transpose();
    return p;
}

enum Edge : unsigned { kLeft = 1, kRight = 2, kBottom = 4, kTop = 8 };

// Which outer edges each rule of the uniaxial set constrains.
std::array<unsigned, kNumOutputs> rule_edges(bool corrected_shear) {
    return {kLeft, kBottom, kRight, kTop,
            corrected_shear
                ? static_cast<unsigned>(kLeft | kRight | kBottom | kTop)
                : static_cast<unsigned>(kRight | kTop)};
}

}  // namespace

HardBcRules uniaxial_plate_rules(double sigma_bar, bool corrected_shear) {
    HardBcRules r;
    r[static_cast<int>(OutputId::u_x)] = {Poly2::constant(0.0),
                                          linear(-1.0, -1.0, 0.0)};
    r[static_cast<int>(OutputId::u_y)] = {Poly2::constant(0.0),
                                          linear(-1.0, 0.0, -1.0)};
    r[static_cast<int>(OutputId::s_xx)] = {Poly2::constant(sigma_bar),
                                           linear(1.0, -1.0, 0.0)};
    r[static_cast<int>(OutputId::s_yy)] = {Poly2::constant(0.0),
                                           linear(1.0, 0.0, -1.0)};
    r[static_cast<int>(OutputId::s_xy)] = {
        Poly2::constant(0.0),
        corrected_shear ? corrected_shear_distance() : printed_shear_distance()};
    return r;
}

HardBcRules free_rules() {
    HardBcRules r;
    for (auto& rule : r)
        rule = {Poly2::constant(0.0), Poly2::constant(1.0)};
    return r;
}

HardBcRules subdomain_rules(const HardBcRules& rules, const Box& box) {
    // The constrained segments are tied to the uniaxial layout; detect
    // per output whether the box touches the respective outer edge.
    const double tol = 1e-12;
    const bool corrected =
        std::abs(rules[4].distance.value(-1.0, 0.0)) < tol;
    auto edges = rule_edges(corrected);
    auto touches = [&](unsigned e) {
        if ((e & kLeft) && std::abs(box.x_min + 1.0) < tol) return true;
        if ((e & kRight) && std::abs(box.x_max - 1.0) < tol) return true;
        if ((e & kBottom) && std::abs(box.y_min + 1.0) < tol) return true;
        if ((e & kTop) && std::abs(box.y_max - 1.0) < tol) return true;
        return false;
    };
    HardBcRules out;
    for (int k = 0; k < kNumOutputs; ++k)
        out[k] = touches(edges[k])
                     ? rules[k]
                     : HardBcRule{Poly2::constant(0.0), Poly2::constant(1.0)};
    return out;
}

BatchEval compose(const BatchEval& raw, const HardBcRules& rules,
                  const Matrix& x) {
    const auto n = x.cols();
    BatchEval out;
    out.y.resize(kNumOutputs, n);
    out.jx.resize(kNumOutputs, n);
    out.jy.resize(kNumOutputs, n);
    for (int k = 0; k < kNumOutputs; ++k) {
        const auto& r = rules[k];
        for (Eigen::Index i = 0; i < n; ++i) {
            const double px = x(0, i), py = x(1, i);
            const double g = r.extension.value(px, py);
            const double d = r.distance.value(px, py);
            out.y(k, i) = g + d * raw.y(k, i);
            out.jx(k, i) = r.extension.dx(px, py) +
                           r.distance.dx(px, py) * raw.y(k, i) +
                           d * raw.jx(k, i);
            out.jy(k, i) = r.extension.dy(px, py) +
                           r.distance.dy(px, py) * raw.y(k, i) +
                           d * raw.jy(k, i);
        }
    }
    return out;
}

void compose_backward(const HardBcRules& rules, const Matrix& x,
                      const BatchEval& raw, Matrix& ybar, Matrix& jxbar,
                      Matrix& jybar) {
    (void)raw;
    const auto n = x.cols();
    for (int k = 0; k < kNumOutputs; ++k) {
        const auto& r = rules[k];
        for (Eigen::Index i = 0; i < n; ++i) {
            const double px = x(0, i), py = x(1, i);
            const double d = r.distance.value(px, py);
            const double yb = ybar(k, i);
            const double jxb = jxbar(k, i);
            const double jyb = jybar(k, i);
            ybar(k, i) = d * yb + r.distance.dx(px, py) * jxb +
                         r.distance.dy(px, py) * jyb;
            jxbar(k, i) = d * jxb;
            jybar(k, i) = d * jyb;
        }
    }
}

}  // namespace microelast
