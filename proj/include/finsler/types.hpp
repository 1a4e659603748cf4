#pragma once

#include <Eigen/Dense>

#include <limits>

namespace finsler {

template <class T>
using VectorT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Axis-aligned chart box.
struct Box {
    Vector lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Vector& x, double tol = 1e-9) const {
        for (int i = 0; i < dim(); ++i)
            if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
        return true;
    }

    // Distance to the nearest face; negative outside the box.
    double boundary_distance(const Vector& x) const {
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim(); ++i) {
            d = std::min(d, x[i] - lo[i]);
            d = std::min(d, hi[i] - x[i]);
        }
        return d;
    }

    bool strictly_inside(const Box& outer, double margin = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (lo[i] < outer.lo[i] + margin || hi[i] > outer.hi[i] - margin) return false;
        return true;
    }
};

// Dense rank-3 coefficient block with a declared index symmetry.
class Tensor3 {
  public:
    enum class Symmetry { none, pair_jk, total };

    Tensor3() = default;
    explicit Tensor3(int n, Symmetry s = Symmetry::none)
        : n_(n), sym_(s), c_(Eigen::VectorXd::Zero(static_cast<long>(n) * n * n)) {}

    int dim() const { return n_; }
    Symmetry symmetry() const { return sym_; }

    double& operator()(int i, int j, int k) { return c_[(static_cast<long>(i) * n_ + j) * n_ + k]; }
    double operator()(int i, int j, int k) const { return c_[(static_cast<long>(i) * n_ + j) * n_ + k]; }

    double max_abs() const { return c_.size() ? c_.cwiseAbs().maxCoeff() : 0.0; }

    double max_symmetry_violation() const {
        double m = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k) {
                    double v = (*this)(i, j, k);
                    if (sym_ == Symmetry::pair_jk || sym_ == Symmetry::total)
                        m = std::max(m, std::abs(v - (*this)(i, k, j)));
                    if (sym_ == Symmetry::total) {
                        m = std::max(m, std::abs(v - (*this)(j, i, k)));
                        m = std::max(m, std::abs(v - (*this)(k, j, i)));
                    }
                }
        return m;
    }

  private:
    int n_ = 0;
    Symmetry sym_ = Symmetry::none;
    Eigen::VectorXd c_;
};

}  // namespace finsler
