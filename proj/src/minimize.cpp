#include <algorithm>
#include <cmath>

#include "finsler/capacity.hpp"
#include "finsler/sphere_bundle.hpp"

namespace finsler {

namespace {

// project a step onto the feasible box, fixed nodes stay put
void project_step(const GridFunction& grid, const Vector& u, const Vector& g, double alpha,
                  Vector& out) {
    const long long total = grid.num_nodes();
    for (long long i = 0; i < total; ++i) {
        if (grid.mask(i) == NodeMask::free_node)
            out[i] = std::min(1.0, std::max(0.0, u[i] - alpha * g[i]));
        else
            out[i] = u[i];
    }
}

double projected_residual_rms(const GridFunction& grid, const Vector& u, const Vector& g) {
    double s = 0.0;
    long long nfree = 0;
    for (long long i = 0; i < grid.num_nodes(); ++i) {
        if (grid.mask(i) != NodeMask::free_node) continue;
        double p = std::min(1.0, std::max(0.0, u[i] - g[i]));
        double d = u[i] - p;
        s += d * d;
        ++nfree;
    }
    return nfree ? std::sqrt(s / static_cast<double>(nfree)) : 0.0;
}

}  // namespace

CapacityResult minimize_capacity(const FinslerModel& m, const CondenserSpec& spec,
                                 const MinimizeOptions& opts) {
    std::vector<int> res = opts.resolution;
    if (res.empty()) res.assign(m.dimension(), 128);
    if (static_cast<int>(res.size()) == 1) res.assign(m.dimension(), res[0]);

    GridFunction grid = make_grid(m, spec, res);
    if (opts.init == MinimizeOptions::Init::constant) {
        for (long long i = 0; i < grid.num_nodes(); ++i)
            if (grid.mask(i) == NodeMask::free_node) grid.values()[i] = opts.init_value;
        grid.apply_masks();
    }

    EnergyWorkspace ws(m, grid, opts.quad_order, opts.threads);

    CapacityResult result;
    result.resolution = res;
    result.quad_order = opts.quad_order;
    result.free_nodes = grid.count_mask(NodeMask::free_node);

    Vector u = grid.values();
    GridFunction trial_grid = grid;

    double E = ws.energy(grid, opts.threads);
    result.history.push_back(E);
    Vector g = ws.gradient(grid, opts.threads);

    Vector u_prev, g_prev;
    double alpha = 1.0;
    int small_steps = 0;
    const double armijo = 1e-4;

    int it = 0;
    for (; it < opts.max_iter; ++it) {
        if (it > 0) {
            // Barzilai-Borwein trial step, safeguarded; backtracking below
            // restores the Armijo decrease guarantee
            Vector s = u - u_prev;
            Vector dy = g - g_prev;
            double sy = s.dot(dy);
            double ss = s.squaredNorm();
            if (sy > 1e-300 && ss > 0)
                alpha = std::min(1e12, std::max(1e-12, ss / sy));
            else
                alpha = std::min(1e12, alpha * 2.0);
        }

        double E_trial = E;
        double decrease = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            project_step(grid, u, g, alpha, trial_grid.values());
            double gstep = 0.0;
            for (long long i = 0; i < grid.num_nodes(); ++i)
                gstep += g[i] * (u[i] - trial_grid.values()[i]);
            if (gstep <= 0.0) break;  // stationary on the feasible box
            E_trial = ws.energy(trial_grid, opts.threads);
            if (E_trial <= E - armijo * gstep) {
                accepted = true;
                decrease = E - E_trial;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            result.converged = true;
            break;
        }

        u_prev = u;
        g_prev = g;
        u = trial_grid.values();
        grid.values() = u;
        E = E_trial;
        result.history.push_back(E);
        g = ws.gradient(grid, opts.threads);

        if (decrease <= opts.tol * std::max(E, 1e-300)) {
            if (++small_steps >= 3) {
                ++it;
                result.converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }

    result.value = E;
    result.iterations = it;
    result.residual = projected_residual_rms(grid, u, g);
    result.u = std::move(grid);
    return result;
}

ConformalCheckReport conformal_invariance_check(const FinslerModel& m, const ScalarField& sigma,
                                                const CondenserSpec& spec,
                                                const MinimizeOptions& opts) {
    ConformalCheckReport rep;
    FinslerModel scaled = conformal_scale(m, sigma);

    // pointwise invariance of the capacity integrand |grad u^V|^n D at the
    // quadrature nodes, probed with the initial ramp's cell gradients
    {
        std::vector<int> res = opts.resolution;
        if (res.empty()) res.assign(m.dimension(), 128);
        if (static_cast<int>(res.size()) == 1) res.assign(m.dimension(), res[0]);
        GridFunction grid = make_grid(m, spec, res);
        const int n = m.dimension();
        std::vector<int> cres(n);
        long long cells = 1;
        for (int d = 0; d < n; ++d) {
            cres[d] = res[d] - 1;
            cells *= cres[d];
        }
        double maxerr = 0.0;
        for (long long cell = 0; cell < cells; ++cell) {
            Vector xc(n);
            std::vector<long long> ci(n);
            long long rest = cell;
            for (int d = n - 1; d >= 0; --d) {
                ci[d] = rest % cres[d];
                rest /= cres[d];
                xc[d] = grid.omega().lo[d] + (static_cast<double>(ci[d]) + 0.5) * grid.spacing(d);
            }
            // cell gradient of the ramp
            Vector du = Vector::Zero(n);
            const int corners = 1 << n;
            for (int c = 0; c < corners; ++c) {
                std::vector<int> nidx(n);
                for (int d = 0; d < n; ++d) nidx[d] = static_cast<int>(ci[d]) + ((c >> (n - 1 - d)) & 1);
                double uv = grid.values()[grid.flat_index(nidx)];
                for (int d = 0; d < n; ++d)
                    du[d] += (((c >> (n - 1 - d)) & 1) ? 1.0 : -1.0) * uv;
            }
            for (int d = 0; d < n; ++d) du[d] /= (corners / 2) * grid.spacing(d);
            if (du.lpNorm<Eigen::Infinity>() < 1e-14) continue;

            std::vector<FiberNode> nb = fiber_quadrature(m, xc, opts.quad_order);
            std::vector<FiberNode> ns = fiber_quadrature(scaled, xc, opts.quad_order);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                double ib = std::pow(vertical_lift_grad_norm(m, xc, nb[k].y, du), n) * nb[k].density;
                double is = std::pow(vertical_lift_grad_norm(scaled, xc, ns[k].y, du), n) * ns[k].density;
                double err = std::abs(is - ib) / std::max(std::abs(ib), 1e-300);
                maxerr = std::max(maxerr, err);
            }
        }
        rep.pointwise_max_rel_err = maxerr;
    }

    rep.base = minimize_capacity(m, spec, opts);
    rep.scaled = minimize_capacity(scaled, spec, opts);
    rep.rel_diff =
        std::abs(rep.scaled.value - rep.base.value) / std::max(std::abs(rep.base.value), 1e-300);
    rep.pass = rep.rel_diff <= rep.capacity_tol && rep.pointwise_max_rel_err <= rep.pointwise_tol;
    return rep;
}

MuResult mu_upper_bound(const FinslerModel& m, const Vector& x1, const Vector& x2,
                        const Box& omega, const std::optional<Shape>& support,
                        const std::vector<double>& radii, const MinimizeOptions& opts) {
    if (x1.size() != m.dimension() || x2.size() != m.dimension())
        throw ConfigError("mu endpoints must match the model dimension");
    if ((x1 - x2).norm() == 0.0) throw ConfigError("mu endpoints must be distinct");
    double margin = 1e-6;
    if (m.domain().boundary_distance(x1) < margin || m.domain().boundary_distance(x2) < margin)
        throw ConfigError("mu endpoints must be interior to the model domain");
    if (radii.empty()) throw ConfigError("mu radii list is empty");

    MuResult out;
    for (double r : radii) {
        if (!(r > 0.0)) throw ConfigError("mu radii must be positive");
        Shape cap = Shape::capsule(x1, x2, r);
        if (!cap.bounding_box().strictly_inside(omega, 1e-12))
            throw ConfigError("capsule continuum escapes omega (radius " + std::to_string(r) + ")");
        CondenserSpec spec{cap, omega, support};
        CapacityResult res = minimize_capacity(m, spec, opts);
        out.table.push_back({r, res.value, res.iterations, res.converged});
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.table.size(); ++i) {
        const double cap = out.table[i].capacity;
        const double cur = out.table[best].capacity;
        if (cap < cur - 1e-12 ||
            (std::abs(cap - cur) <= 1e-12 && out.table[i].radius < out.table[best].radius))
            best = i;
    }
    out.argmin_radius = out.table[best].radius;
    double mn = out.table[0].capacity;
    for (const auto& c : out.table) mn = std::min(mn, c.capacity);
    out.value = mn;
    return out;
}

}  // namespace finsler
