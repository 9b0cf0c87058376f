#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace microelast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { swish, sigmoid, tanh, identity };

/// Dense feed-forward topology with absorbed bias. `n_layers` counts the
/// hidden layers; the output layer is always linear.
struct Topology {
    int input_dim = 2;
    int output_dim = 5;
    int n_layers = 4;
    int units_per_layer = 64;
    Activation activation = Activation::swish;
    double beta = 1.0;

    void validate() const;

    /// Number of weight matrices (hidden layers + linear output layer).
    int matrix_count() const { return n_layers + 1; }
    int fan_in(int l) const { return l == 0 ? input_dim : units_per_layer; }
    int fan_out(int l) const {
        return l == n_layers ? output_dim : units_per_layer;
    }
    /// Total parameter count, bias columns included.
    std::int64_t param_count() const;
};

/// Flat parameter vector. Layout: weight matrices in layer order, each
/// stored column-major as fan_out x (fan_in + 1) with the bias as the
/// trailing column.
struct ParamVector {
    Vector values;

    std::int64_t size() const { return values.size(); }
    Eigen::Map<const Matrix> layer(const Topology& topo, int l) const;
    Eigen::Map<Matrix> layer(const Topology& topo, int l);
};

ParamVector init_params(const Topology& topo, std::uint64_t seed);
ParamVector zero_params(const Topology& topo);

/// Network outputs and exact input-Jacobian at one point.
struct JacobianSample {
    Eigen::Vector2d x;
    Vector y;
    Matrix dy_dx;  // output_dim x 2
};

/// Saved intermediates of a batched forward + tangent pass, consumed by
/// the reverse pass.
struct ForwardTape {
    // Per weight matrix l: input activations and their two tangents
    // (columns are points), plus pre-activations of the layer itself.
    std::vector<Matrix> a, ax, ay;  // fan_in(l) x n
    std::vector<Matrix> z;          // fan_out(l) x n
    std::vector<Matrix> tx, ty;     // fan_out(l) x n, pre-activation tangents
};

/// Batched results: columns are points.
struct BatchEval {
    Matrix y;   // output_dim x n
    Matrix jx;  // output_dim x n, dy/dx_1
    Matrix jy;  // output_dim x n, dy/dx_2
};

class Network {
  public:
    Network(Topology topo);

    const Topology& topology() const { return topo_; }

    /// Plain forward pass; x has one point per column.
    Matrix forward(const ParamVector& params, const Matrix& x) const;

    /// Forward pass with exact tangent propagation of both input
    /// directions. When `tape` is non-null the intermediates needed for
    /// the reverse pass are recorded.
    BatchEval forward_with_jacobian(const ParamVector& params,
                                    const Matrix& x,
                                    ForwardTape* tape = nullptr) const;

    JacobianSample eval(const ParamVector& params,
                        const Eigen::Vector2d& x) const;

    /// Reverse pass over the combined forward + tangent computation.
    /// Seeds are dL/dy, dL/d(dy/dx1), dL/d(dy/dx2); the exact parameter
    /// gradient is accumulated into `grad` (ParamVector layout).
    void backward(const ParamVector& params, const ForwardTape& tape,
                  const Matrix& ybar, const Matrix& jxbar,
                  const Matrix& jybar, Vector& grad) const;

  private:
    Topology topo_;
};

/// Loss callback contract for loss_gradient: given the batched outputs
/// and input-Jacobians, return the scalar loss and fill the adjoint
/// seeds (same shapes as the BatchEval members, zero-initialized).
using LossFn = std::function<double(const BatchEval& eval, Matrix& ybar,
                                    Matrix& jxbar, Matrix& jybar)>;

/// Exact gradient of a scalar loss built from outputs and first
/// input-derivatives at a batch of points.
std::pair<double, Vector> loss_gradient(const Network& net,
                                        const ParamVector& params,
                                        const Matrix& x, const LossFn& loss);

}  // namespace microelast
