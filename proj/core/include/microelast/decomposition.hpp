#pragma once

#include <vector>

#include "microelast/elasticity.hpp"
#include "microelast/sampling.hpp"

namespace microelast {

/// Uniform tiling of the scaled unit cell [-1, 1]^2 into nx x ny
/// axis-aligned boxes, row-major from the lower-left corner.
struct Decomposition {
    int nx = 1, ny = 1;
    std::vector<Box> boxes;

    struct Interface {
        int a, b;        // adjacent box indices, a < b
        bool vertical;   // segment orientation
        Eigen::Vector2d p0, p1;
    };
    std::vector<Interface> interfaces;

    int box_of(double x, double y) const;  // lowest-index owner
};

Decomposition decompose(int nx, int ny);

struct CpinnOptions {
    double psi = 20.0;
    int points_per_interface = 0;  // 0: per-subdomain grid side count
    bool interface_full = false;   // penalize both u components on both
                                   // orientations
};

/// Domain-decomposed PINN objective: one network per subdomain, hard
/// boundary rules restricted per box, displacement/traction interface
/// penalties, and a single global work-balance term. The optimizer
/// sees the concatenation of the subnet parameter vectors.
class CpinnProblem {
  public:
    CpinnProblem(Topology subnet_topo, const BvpSpec& bvp,
                 const MaterialField& material, const Decomposition& decomp,
                 const CollocationSet& points, const CpinnOptions& opts);

    const Decomposition& decomposition() const { return decomp_; }
    const Topology& subnet_topology() const { return topo_; }
    int n_subnets() const { return static_cast<int>(decomp_.boxes.size()); }
    std::int64_t param_count() const {
        return topo_.param_count() * n_subnets();
    }
    const HardBcRules& subnet_rules(int i) const { return rules_[i]; }

    Vector init_params(std::uint64_t seed) const;
    Eigen::Map<const Vector> subnet_params(const Vector& theta, int i) const;

    struct CpinnLoss {
        LossBreakdown pinn;    // summed residual terms + global work
        double interface = 0;  // weighted interface penalty
        double total = 0;
    };

    CpinnLoss loss(const Vector& theta) const;
    std::pair<CpinnLoss, Vector> loss_and_grad(const Vector& theta) const;

    /// Mean absolute displacement mismatch across all interface points.
    double interface_defect(const Vector& theta) const;

    /// Composed scaled evaluation at physical points, each point owned
    /// by the lowest-index containing box. Faults outside the domain.
    BatchEval predict(const Vector& theta, const Matrix& x_physical) const;

    const ScaleSet& scales() const { return scales_; }

  private:
    CpinnLoss loss_impl(const Vector& theta, Vector* grad) const;

    Topology topo_;
    ScaleSet scales_;
    double edge_length_;
    double psi_;
    bool interface_full_;
    Decomposition decomp_;
    std::vector<HardBcRules> rules_;
    // Per subnet: scaled interior points, material values, scaled
    // loaded-edge points (may be empty).
    std::vector<Matrix> x_int_, x_bnd_;
    std::vector<Vector> lambda_hat_, mu_hat_;
    // Per interface: scaled points, evaluated by both adjacent subnets.
    std::vector<Matrix> x_iface_;
    Eigen::Index n_boundary_total_ = 0;
};

}  // namespace microelast
