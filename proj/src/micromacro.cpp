#include "semikin/micromacro.hpp"

#include <stdexcept>

namespace semikin {

PotentialField make_potential(std::vector<double> values, double dx) {
    PotentialField p;
    p.values = std::move(values);
    p.dx = dx;
    p.grad = grid_gradient(p.values, dx);
    return p;
}

double bracket(const VelocityGrid& grid, const std::vector<double>& psi_row) {
    double s = 0.0;
    for (int j = 0; j < grid.n_nodes; ++j) s += psi_row[j] * grid.weights[j];
    return s;
}

std::vector<double> project_pi(const VelocityGrid& grid, const std::vector<double>& psi_row) {
    // Pi(c 1) = c 1 identically; taking the branch keeps Pi exactly idempotent.
    bool constant = true;
    for (int j = 1; j < grid.n_nodes && constant; ++j) constant = psi_row[j] == psi_row[0];
    if (constant) return std::vector<double>(grid.n_nodes, psi_row[0]);
    double m = bracket(grid, psi_row);
    return std::vector<double>(grid.n_nodes, m);
}

std::vector<double> grid_gradient(const std::vector<double>& f, double dx) {
    const int n = (int)f.size();
    std::vector<double> g(n, 0.0);
    if (n < 2) return g;
    g[0] = (f[1] - f[0]) / dx;
    g[n - 1] = (f[n - 1] - f[n - 2]) / dx;
    for (int i = 1; i < n - 1; ++i) g[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    return g;
}

namespace {

// <d_v g>/M-bracket at one spatial point: sum_j [(C psi)_j - 2 v_j psi_j] w_j.
double bracket_dv_g(const VelocityGrid& grid, const double* psi_row) {
    double s = 0.0;
    for (int j = 0; j < grid.n_nodes; ++j) {
        double c = 0.0;
        for (int k = 0; k < grid.n_nodes; ++k) c += grid.d(j, k) * psi_row[k];
        s += (c - 2.0 * grid.nodes[j] * psi_row[j]) * grid.weights[j];
    }
    return s;
}

void check_shapes(const MacroField& rho, const MicroField& g, const PotentialField& phi,
                  const VelocityGrid& grid, const char* who) {
    if (g.n_x != rho.n() || phi.n() != rho.n() || g.n_v != grid.n_nodes)
        throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

}  // namespace

std::vector<double> macro_residual(const std::vector<double>& drho_dt, const MicroField& g,
                                   const PotentialField& phi, const VelocityGrid& grid) {
    const int nx = g.n_x;
    const int nv = g.n_v;
    if ((int)drho_dt.size() != nx || phi.n() != nx || nv != grid.n_nodes)
        throw std::invalid_argument("macro_residual: grid mismatch");

    std::vector<double> flux(nx);       // <v g> per x
    for (int i = 0; i < nx; ++i) {
        double s = 0.0;
        for (int j = 0; j < nv; ++j) s += grid.nodes[j] * g.at(i, j) * grid.weights[j];
        flux[i] = s;
    }
    std::vector<double> dflux = grid_gradient(flux, phi.dx);

    std::vector<double> r(nx);
    for (int i = 0; i < nx; ++i)
        r[i] = drho_dt[i] + dflux[i] + phi.grad[i] * bracket_dv_g(grid, &g.psi[(size_t)i * nv]);
    return r;
}

MicroField limit_residual(const MacroField& rho, const MicroField& g, const PotentialField& phi,
                          const VelocityGrid& grid, const CollisionContext& ctx) {
    check_shapes(rho, g, phi, grid, "limit_residual");
    const int nx = g.n_x;
    const int nv = g.n_v;
    std::vector<double> drho = grid_gradient(rho.values, rho.dx);

    MicroField r = MicroField::zeros(nx, nv);
    std::vector<double> row(nv);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nv; ++j) row[j] = g.at(i, j);
        std::vector<double> q = apply_Q_psi(ctx, row);
        for (int j = 0; j < nv; ++j) {
            double v = grid.nodes[j];
            r.at(i, j) = v * drho[i] - 2.0 * v * rho.values[i] * phi.grad[i] - q[j];
        }
    }
    return r;
}

MicroField micro_residual(const MacroField& rho, const MicroField& g, const MicroField& dpsi_dt,
                          const PotentialField& phi, const VelocityGrid& grid, double eps,
                          const CollisionContext& ctx) {
    check_shapes(rho, g, phi, grid, "micro_residual");
    if (dpsi_dt.n_x != g.n_x || dpsi_dt.n_v != g.n_v)
        throw std::invalid_argument("micro_residual: dpsi_dt shape mismatch");
    if (eps == 0.0) return limit_residual(rho, g, phi, grid, ctx);

    const int nx = g.n_x;
    const int nv = g.n_v;
    std::vector<double> drho = grid_gradient(rho.values, rho.dx);

    // d_x psi per velocity node (central interior, one-sided ends).
    std::vector<double> col(nx);
    MicroField dxpsi = MicroField::zeros(nx, nv);
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nx; ++i) col[i] = g.at(i, j);
        std::vector<double> d = grid_gradient(col, rho.dx);
        for (int i = 0; i < nx; ++i) dxpsi.at(i, j) = d[i];
    }

    MicroField r = MicroField::zeros(nx, nv);
    std::vector<double> row(nv), trans(nv);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nv; ++j) row[j] = g.at(i, j);
        std::vector<double> q = apply_Q_psi(ctx, row);
        std::vector<double> cpsi = apply_v_derivative(grid, row);

        // (I - Pi)(v d_x psi + d_x(phi) d_v g / M) at this x
        for (int j = 0; j < nv; ++j) {
            double v = grid.nodes[j];
            trans[j] = v * dxpsi.at(i, j) + phi.grad[i] * (cpsi[j] - 2.0 * v * row[j]);
        }
        double mean = bracket(grid, trans);
        for (int j = 0; j < nv; ++j) {
            double v = grid.nodes[j];
            r.at(i, j) = eps * eps * dpsi_dt.at(i, j) + v * drho[i] + eps * (trans[j] - mean) -
                         2.0 * v * rho.values[i] * phi.grad[i] - q[j];
        }
    }
    return r;
}

}  // namespace semikin
