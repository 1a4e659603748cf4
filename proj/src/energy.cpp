#include <cmath>
#include <exception>
#include <mutex>

#include "finsler/capacity.hpp"
#include "finsler/sphere_bundle.hpp"
#include "parallel.hpp"

namespace finsler {

// The discrete energy integrates the multilinear (Q1) cell interpolant
// with a tensor 2-point Gauss rule per cell, against one fiber-quadrature
// sample at the cell center. Keeping a single (x_c, phi) sample per cell
// is what makes the conformal rescaling cancel per cell to rounding; the
// Gauss rule only refines how the spatial gradient of the interpolant is
// integrated.

EnergyWorkspace::EnergyWorkspace(const FinslerModel& m, const GridFunction& grid, int quad_order,
                                 int threads) {
    n_ = grid.dim();
    res_ = grid.resolution();
    quad_order_ = quad_order;
    cres_.resize(n_);
    h_.resize(n_);
    cell_vol_ = 1.0;
    num_cells_ = 1;
    for (int d = 0; d < n_; ++d) {
        cres_[d] = res_[d] - 1;
        h_[d] = grid.spacing(d);
        cell_vol_ *= h_[d];
        num_cells_ *= cres_[d];
    }
    node_stride_.assign(n_, 1);
    cell_stride_.assign(n_, 1);
    for (int d = n_ - 2; d >= 0; --d) {
        node_stride_[d] = node_stride_[d + 1] * res_[d + 1];
        cell_stride_[d] = cell_stride_[d + 1] * cres_[d + 1];
    }
    nodes_per_cell_ = 1 << n_;
    corner_offset_.resize(nodes_per_cell_);
    for (int c = 0; c < nodes_per_cell_; ++c) {
        long long off = 0;
        for (int d = 0; d < n_; ++d)
            if ((c >> (n_ - 1 - d)) & 1) off += node_stride_[d];
        corner_offset_[c] = off;
    }

    // d(interpolant)/dx_d at the tensor Gauss points, as corner weights
    ngauss_ = 1 << n_;
    const double ga = (3.0 - std::sqrt(3.0)) / 6.0;
    gcoef_.assign(static_cast<std::size_t>(ngauss_) * nodes_per_cell_ * n_, 0.0);
    for (int gp = 0; gp < ngauss_; ++gp) {
        double xi[3];
        for (int d = 0; d < n_; ++d) xi[d] = ((gp >> (n_ - 1 - d)) & 1) ? 1.0 - ga : ga;
        for (int c = 0; c < nodes_per_cell_; ++c)
            for (int d = 0; d < n_; ++d) {
                double w = ((c >> (n_ - 1 - d)) & 1) ? 1.0 : -1.0;
                for (int e = 0; e < n_; ++e) {
                    if (e == d) continue;
                    w *= ((c >> (n_ - 1 - e)) & 1) ? xi[e] : 1.0 - xi[e];
                }
                gcoef_[(static_cast<std::size_t>(gp) * nodes_per_cell_ + c) * n_ + d] = w;
            }
    }

    std::vector<Vector> phis;
    std::vector<double> ws;
    detail::fiber_parameters(n_, quad_order_, phis, ws);
    fiber_count_ = static_cast<int>(phis.size());

    const Box& omega = grid.omega();
    const int terms = (n_ == 2) ? 3 : fiber_count_ * 7;
    cell_terms_.assign(num_cells_ * terms, 0.0);

    std::exception_ptr error;
    std::mutex error_mutex;
    detail::parallel_chunks(num_cells_, threads, [&](long long, long long begin, long long end) {
        try {
            for (long long cell = begin; cell < end; ++cell) {
                Vector xc(n_);
                long long rest = cell;
                for (int d = n_ - 1; d >= 0; --d) {
                    long long i = rest % cres_[d];
                    rest /= cres_[d];
                    xc[d] = omega.lo[d] + (static_cast<double>(i) + 0.5) * h_[d];
                }
                double* slot = cell_terms_.data() + cell * terms;
                for (int k = 0; k < fiber_count_; ++k) {
                    detail::IndicatrixPoint ip = detail::indicatrix_point(m, xc, phis[k]);
                    double wd = ws[k] * ip.density;
                    const Matrix& gi = ip.pt.g_inv;
                    if (n_ == 2) {
                        slot[0] += wd * gi(0, 0);
                        slot[1] += wd * gi(0, 1);
                        slot[2] += wd * gi(1, 1);
                    } else {
                        double* t = slot + k * 7;
                        t[0] = wd;
                        t[1] = gi(0, 0);
                        t[2] = gi(0, 1);
                        t[3] = gi(0, 2);
                        t[4] = gi(1, 1);
                        t[5] = gi(1, 2);
                        t[6] = gi(2, 2);
                    }
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    });
    if (error) std::rethrow_exception(error);
}

void EnergyWorkspace::cell_gauss_gradients(const Vector& u, long long cell, double* du) const {
    long long base = 0;
    long long rest = cell;
    for (int d = n_ - 1; d >= 0; --d) {
        long long i = rest % cres_[d];
        rest /= cres_[d];
        base += i * node_stride_[d];
    }
    const int total = ngauss_ * n_;
    for (int t = 0; t < total; ++t) du[t] = 0.0;
    for (int c = 0; c < nodes_per_cell_; ++c) {
        double uv = u[base + corner_offset_[c]];
        const double* w = gcoef_.data() + static_cast<std::size_t>(c) * n_;
        for (int gp = 0; gp < ngauss_; ++gp) {
            const double* wg = w + static_cast<std::size_t>(gp) * nodes_per_cell_ * n_;
            for (int d = 0; d < n_; ++d) du[gp * n_ + d] += uv * wg[d];
        }
    }
    for (int gp = 0; gp < ngauss_; ++gp)
        for (int d = 0; d < n_; ++d) du[gp * n_ + d] /= h_[d];
}

double EnergyWorkspace::energy(const GridFunction& uf, int threads) const {
    const Vector& u = uf.values();
    const long long chunks = detail::chunk_count(num_cells_);
    std::vector<double> partial(chunks, 0.0);
    const double gw = 1.0 / ngauss_;
    detail::parallel_chunks(num_cells_, threads, [&](long long c, long long begin, long long end) {
        double local = 0.0;
        double du[24];
        for (long long cell = begin; cell < end; ++cell) {
            cell_gauss_gradients(u, cell, du);
            double cell_sum = 0.0;
            if (n_ == 2) {
                const double* A = cell_terms_.data() + cell * 3;
                for (int gp = 0; gp < ngauss_; ++gp) {
                    const double* g = du + gp * 2;
                    cell_sum += A[0] * g[0] * g[0] + 2.0 * A[1] * g[0] * g[1] + A[2] * g[1] * g[1];
                }
            } else {
                for (int gp = 0; gp < ngauss_; ++gp) {
                    const double* g = du + gp * 3;
                    const double* t = cell_terms_.data() + cell * fiber_count_ * 7;
                    for (int k = 0; k < fiber_count_; ++k, t += 7) {
                        double q = t[1] * g[0] * g[0] + t[4] * g[1] * g[1] + t[6] * g[2] * g[2] +
                                   2.0 * (t[2] * g[0] * g[1] + t[3] * g[0] * g[2] + t[5] * g[1] * g[2]);
                        cell_sum += t[0] * q * std::sqrt(q);
                    }
                }
            }
            local += cell_vol_ * gw * cell_sum;
        }
        partial[c] = local;
    });
    double e = 0.0;
    for (double p : partial) e += p;
    return e;
}

Vector EnergyWorkspace::gradient(const GridFunction& uf, int threads) const {
    const Vector& u = uf.values();
    const double gw = 1.0 / ngauss_;

    // pass 1: flux per (cell, gauss point, axis)
    std::vector<double> flux(static_cast<std::size_t>(num_cells_) * ngauss_ * n_);
    detail::parallel_chunks(num_cells_, threads, [&](long long, long long begin, long long end) {
        double du[24];
        for (long long cell = begin; cell < end; ++cell) {
            cell_gauss_gradients(u, cell, du);
            double* f = flux.data() + static_cast<std::size_t>(cell) * ngauss_ * n_;
            if (n_ == 2) {
                const double* A = cell_terms_.data() + cell * 3;
                for (int gp = 0; gp < ngauss_; ++gp) {
                    const double* g = du + gp * 2;
                    f[gp * 2 + 0] = cell_vol_ * gw * 2.0 * (A[0] * g[0] + A[1] * g[1]);
                    f[gp * 2 + 1] = cell_vol_ * gw * 2.0 * (A[1] * g[0] + A[2] * g[1]);
                }
            } else {
                for (int gp = 0; gp < ngauss_; ++gp) {
                    const double* g = du + gp * 3;
                    const double* t = cell_terms_.data() + cell * fiber_count_ * 7;
                    double acc[3] = {0, 0, 0};
                    for (int k = 0; k < fiber_count_; ++k, t += 7) {
                        double g0 = t[1] * g[0] + t[2] * g[1] + t[3] * g[2];
                        double g1 = t[2] * g[0] + t[4] * g[1] + t[5] * g[2];
                        double g2 = t[3] * g[0] + t[5] * g[1] + t[6] * g[2];
                        double q = g0 * g[0] + g1 * g[1] + g2 * g[2];
                        double w = t[0] * 3.0 * std::sqrt(q);
                        acc[0] += w * g0;
                        acc[1] += w * g1;
                        acc[2] += w * g2;
                    }
                    for (int d = 0; d < 3; ++d) f[gp * 3 + d] = cell_vol_ * gw * acc[d];
                }
            }
        }
    });

    // pass 2: gather per node (no races, fixed order per node)
    const long long total_nodes = uf.num_nodes();
    Vector g = Vector::Zero(total_nodes);
    detail::parallel_chunks(total_nodes, threads, [&](long long, long long begin, long long end) {
        std::vector<long long> nidx(n_);
        for (long long node = begin; node < end; ++node) {
            if (uf.mask(node) != NodeMask::free_node) continue;
            long long rest = node;
            for (int d = n_ - 1; d >= 0; --d) {
                nidx[d] = rest % res_[d];
                rest /= res_[d];
            }
            double acc = 0.0;
            for (int c = 0; c < nodes_per_cell_; ++c) {
                long long cellflat = 0;
                bool ok = true;
                for (int d = 0; d < n_; ++d) {
                    int bit = (c >> (n_ - 1 - d)) & 1;
                    long long ci = nidx[d] - bit;
                    if (ci < 0 || ci >= cres_[d]) {
                        ok = false;
                        break;
                    }
                    cellflat += ci * cell_stride_[d];
                }
                if (!ok) continue;
                const double* f = flux.data() + static_cast<std::size_t>(cellflat) * ngauss_ * n_;
                for (int gp = 0; gp < ngauss_; ++gp) {
                    const double* wg =
                        gcoef_.data() + (static_cast<std::size_t>(gp) * nodes_per_cell_ + c) * n_;
                    for (int d = 0; d < n_; ++d) acc += f[gp * n_ + d] * wg[d] / h_[d];
                }
            }
            g[node] = acc;
        }
    });
    return g;
}

double energy(const FinslerModel& m, const GridFunction& u, int quad_order, int threads) {
    EnergyWorkspace ws(m, u, quad_order, threads);
    return ws.energy(u, threads);
}

Vector energy_gradient(const FinslerModel& m, const GridFunction& u, int quad_order, int threads) {
    EnergyWorkspace ws(m, u, quad_order, threads);
    return ws.gradient(u, threads);
}

}  // namespace finsler
