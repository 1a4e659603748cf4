#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "finsler/model.hpp"

namespace finsler {

// Condenser geometry in chart coordinates.
struct Shape {
    enum class Kind { disk, box, capsule };
    Kind kind = Kind::disk;
    Vector center;      // disk
    double radius = 0;  // disk / capsule
    Vector lo, hi;      // box
    Vector a, b;        // capsule endpoints

    static Shape disk(Vector center, double radius);
    static Shape box(Vector lo, Vector hi);
    static Shape capsule(Vector a, Vector b, double radius);

    // signed distance, negative inside
    double sdf(const Vector& x) const;
    bool contains(const Vector& x) const { return sdf(x) <= 0.0; }
    Box bounding_box() const;
};

// Inner plate C, truncation box Omega, and an optional support region:
// nodes outside the support (or on the boundary of Omega) are pinned to
// zero, nodes inside C to one.
struct CondenserSpec {
    Shape inner;
    Box omega;
    std::optional<Shape> support;
};

enum class NodeMask : std::uint8_t { free_node = 0, fixed_one = 1, fixed_zero = 2 };

// Nodal function on a tensor grid over Omega with condenser masks.
class GridFunction {
  public:
    GridFunction() = default;
    GridFunction(Box omega, std::vector<int> resolution);

    int dim() const { return box_.dim(); }
    const Box& omega() const { return box_; }
    const std::vector<int>& resolution() const { return res_; }
    long long num_nodes() const { return static_cast<long long>(values_.size()); }
    double spacing(int axis) const { return (box_.hi[axis] - box_.lo[axis]) / (res_[axis] - 1); }

    long long flat_index(const std::vector<int>& idx) const;
    Vector node_coords(long long flat) const;

    Vector& values() { return values_; }
    const Vector& values() const { return values_; }
    NodeMask mask(long long flat) const { return mask_[flat]; }
    void set_mask(long long flat, NodeMask m) { mask_[flat] = m; }
    long long count_mask(NodeMask m) const;

    // pin masked nodes to their fixed values and clamp everything to [0,1]
    void apply_masks();

  private:
    Box box_;
    std::vector<int> res_;
    Vector values_;
    std::vector<NodeMask> mask_;
};

GridFunction make_grid(const FinslerModel& m, const CondenserSpec& spec,
                       const std::vector<int>& resolution);

// Immutable per-cell quadrature cache for the energy functional. For n=2
// the fiber sum collapses into one symmetric matrix per cell; n=3 keeps
// the per-node terms because of the 3/2 power.
class EnergyWorkspace {
  public:
    EnergyWorkspace(const FinslerModel& m, const GridFunction& grid, int quad_order,
                    int threads = 1);

    double energy(const GridFunction& u, int threads = 1) const;
    // derivative of the discrete energy w.r.t. node values; zero at fixed nodes
    Vector gradient(const GridFunction& u, int threads = 1) const;

    int quad_order() const { return quad_order_; }
    long long num_cells() const { return num_cells_; }

  private:
    int n_ = 0;
    std::vector<int> res_, cres_;
    std::vector<long long> node_stride_, cell_stride_;
    std::vector<double> h_;
    double cell_vol_ = 0;
    int quad_order_ = 0;
    long long num_cells_ = 0;
    int nodes_per_cell_ = 0;
    int ngauss_ = 0;
    std::vector<long long> corner_offset_;
    std::vector<double> gcoef_;       // corner weights of the gradient at each Gauss point
    std::vector<double> cell_terms_;  // n=2: 3 per cell; n=3: (1+6) per (cell,node)
    int fiber_count_ = 0;

    void cell_gauss_gradients(const Vector& u, long long cell, double* du) const;
};

double energy(const FinslerModel& m, const GridFunction& u, int quad_order, int threads = 1);
Vector energy_gradient(const FinslerModel& m, const GridFunction& u, int quad_order,
                       int threads = 1);

struct MinimizeOptions {
    std::vector<int> resolution;
    int quad_order = 16;
    int max_iter = 5000;
    double tol = 1e-8;
    enum class Init { ramp, constant };
    Init init = Init::ramp;
    double init_value = 0.5;
    int threads = 1;
};

struct CapacityResult {
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;  // RMS of the unit-step projected gradient over free nodes
    bool converged = false;
    std::vector<double> history;  // energy after every accepted step, starting with E(u0)
    std::vector<int> resolution;
    int quad_order = 0;
    long long free_nodes = 0;
    GridFunction u;
};

CapacityResult minimize_capacity(const FinslerModel& m, const CondenserSpec& spec,
                                 const MinimizeOptions& opts);

struct ConformalCheckReport {
    CapacityResult base;
    CapacityResult scaled;
    double rel_diff = 0.0;
    double pointwise_max_rel_err = 0.0;
    double capacity_tol = 1e-8;
    double pointwise_tol = 1e-12;
    bool pass = false;
};

ConformalCheckReport conformal_invariance_check(const FinslerModel& m, const ScalarField& sigma,
                                                const CondenserSpec& spec,
                                                const MinimizeOptions& opts);

struct MuCandidate {
    double radius = 0.0;
    double capacity = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct MuResult {
    double value = 0.0;
    double argmin_radius = 0.0;
    std::vector<MuCandidate> table;
    bool upper_bound_only = true;  // capsule family only, so an upper bound on mu
};

MuResult mu_upper_bound(const FinslerModel& m, const Vector& x1, const Vector& x2,
                        const Box& omega, const std::optional<Shape>& support,
                        const std::vector<double>& radii, const MinimizeOptions& opts);

}  // namespace finsler
