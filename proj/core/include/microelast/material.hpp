#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "microelast/network.hpp"

namespace microelast {

struct EngineeringConstants {
    double youngs_modulus;  // MPa
    double poisson_ratio;
};

struct LameConstants {
    double lambda;  // MPa
    double mu;      // MPa
};

LameConstants lame_from_engineering(const EngineeringConstants& ec);

/// Map x -> (lambda(x), mu(x)) over the physical unit cell
/// [-L/2, L/2]^2. Queries outside the domain (beyond a 1e-9 clamp
/// band) fault.
class MaterialField {
  public:
    virtual ~MaterialField() = default;
    virtual double edge_length() const = 0;
    virtual LameConstants query(const Eigen::Vector2d& x) const = 0;

    /// Component-wise bounds over the domain, used for loss scaling.
    virtual LameConstants max_constants() const = 0;
    virtual LameConstants min_constants() const = 0;

    void check_domain(Eigen::Vector2d& x) const;
};

class ConstantMaterial final : public MaterialField {
  public:
    ConstantMaterial(LameConstants lame, double edge_length);
    double edge_length() const override { return length_; }
    LameConstants query(const Eigen::Vector2d& x) const override;
    LameConstants max_constants() const override { return lame_; }
    LameConstants min_constants() const override { return lame_; }

  private:
    LameConstants lame_;
    double length_;
};

/// Smooth circular inclusion profile:
///   c1 * (c2 + tanh((radius - r) / delta)) + c3.
struct TanhInclusionSpec {
    double c1, c2, c3;
    double delta;
    double radius;  // mm

    /// Solve the saturated two-point conditions: value at the center
    /// (tanh -> +1) and far away (tanh -> -1), with c2 fixed to zero.
    static TanhInclusionSpec calibrated(double center_value, double far_value,
                                        double radius, double delta);

    double value(const Eigen::Vector2d& x) const;
    Eigen::Vector2d gradient(const Eigen::Vector2d& x) const;
};

class TanhInclusionMaterial final : public MaterialField {
  public:
    /// Both fields share radius and steepness and interpolate between
    /// the matrix (far) and inclusion (center) phases.
    TanhInclusionMaterial(LameConstants inclusion, LameConstants matrix,
                          double radius, double delta, double edge_length);
    double edge_length() const override { return length_; }
    LameConstants query(const Eigen::Vector2d& x) const override;
    LameConstants max_constants() const override;
    LameConstants min_constants() const override;
    const TanhInclusionSpec& lambda_spec() const { return lambda_; }
    const TanhInclusionSpec& mu_spec() const { return mu_; }

  private:
    TanhInclusionSpec lambda_, mu_;
    double length_;
};

/// Row-major grayscale voxel image, values in [0, 1], top row first.
struct VoxelGrid {
    int width = 0, height = 0;
    std::vector<double> values;
    double pixel_size = 1.0;  // mm

    double at(int row, int col) const { return values[row * width + col]; }
    double& at(int row, int col) { return values[row * width + col]; }
    bool is_binary() const;
};

/// Voxel (row, col) center in physical coordinates of an L x L cell.
Eigen::Vector2d voxel_center(const VoxelGrid& grid, int row, int col,
                             double edge_length);

struct MaterialNetOptions {
    Topology topology{2, 2, 20, 15, Activation::swish, 1.0};
    int max_iters = 2000;
    std::uint64_t seed = 1;
};

/// Coordinate network with range-bounded outputs:
///   lambda = (tanh(o0) + 1) (max - min)/2 + min, likewise for mu.
class MaterialNetwork final : public MaterialField {
  public:
    MaterialNetwork(Topology topo, ParamVector params, LameConstants lo,
                    LameConstants hi, double edge_length);

    double edge_length() const override { return length_; }
    LameConstants query(const Eigen::Vector2d& x) const override;
    LameConstants max_constants() const override { return hi_; }
    LameConstants min_constants() const override { return lo_; }

    const ParamVector& params() const { return params_; }
    const Topology& topology() const { return net_.topology(); }
    LameConstants lower() const { return lo_; }
    LameConstants upper() const { return hi_; }

    /// Batched query, one physical point per column.
    std::pair<Vector, Vector> query_batch(const Matrix& x) const;

  private:
    Network net_;
    ParamVector params_;
    LameConstants lo_, hi_;
    double length_;
};

/// Least-squares fit of the bounded material network to per-voxel
/// targets at voxel centers. The grid must be binary; phase value 1
/// maps to `phase1`, 0 to `phase0`.
std::unique_ptr<MaterialNetwork> train_material_network(
    const VoxelGrid& grid, LameConstants phase0, LameConstants phase1,
    double edge_length, const MaterialNetOptions& opts);

}  // namespace microelast
