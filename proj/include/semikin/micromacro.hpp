#pragma once

#include <vector>

#include "semikin/collision.hpp"
#include "semikin/hermite.hpp"

namespace semikin {

/// Density rho on the uniform spatial grid x_0..x_{Nx}.
struct MacroField {
    std::vector<double> values;
    double dx = 0.0;
    int n() const { return (int)values.size(); }
};

/// psi = g/M on the x-by-v node grid; row i holds psi(x_i, v_0..v_{n-1}).
struct MicroField {
    std::vector<double> psi;   // row-major [n_x][n_v]
    int n_x = 0;
    int n_v = 0;
    double& at(int i, int j) { return psi[i * n_v + j]; }
    double at(int i, int j) const { return psi[i * n_v + j]; }
    static MicroField zeros(int n_x, int n_v) {
        MicroField f;
        f.n_x = n_x;
        f.n_v = n_v;
        f.psi.assign((size_t)n_x * n_v, 0.0);
        return f;
    }
};

/// Electric potential on the spatial grid with its finite-difference
/// gradient (central interior, one-sided at the ends).
struct PotentialField {
    std::vector<double> values;
    std::vector<double> grad;
    double dx = 0.0;
    int n() const { return (int)values.size(); }
};

PotentialField make_potential(std::vector<double> values, double dx);

/// <psi>_w = sum_j psi(v_j) w_j  (= int psi M dv under the quadrature).
double bracket(const VelocityGrid& grid, const std::vector<double>& psi_row);

/// Pi in psi-space: the constant vector <psi>_w.
std::vector<double> project_pi(const VelocityGrid& grid, const std::vector<double>& psi_row);

/// Spatial derivative of a grid function: 2nd-order central interior,
/// 1st-order one-sided at the boundary nodes.
std::vector<double> grid_gradient(const std::vector<double>& f, double dx);

/// Macro-equation residual r1(x_i) = drho_dt + d_x<v g> + d_x(phi) <d_v g>,
/// with <d_v g> computed discretely as sum_j [(C psi)_j - 2 v_j psi_j] w_j.
/// The time derivative is supplied by the caller.
std::vector<double> macro_residual(const std::vector<double>& drho_dt, const MicroField& g,
                                   const PotentialField& phi, const VelocityGrid& grid);

/// Micro-equation residual in psi-space (residual divided by M):
///   eps^2 dpsi_dt + v d_x(rho) + eps (I-Pi)(v d_x psi + d_x(phi)(C psi - 2 v psi))
///   - 2 v rho d_x(phi) - Q(psi).
/// At eps = 0 this takes the limit_residual code path bit-for-bit.
MicroField micro_residual(const MacroField& rho, const MicroField& g, const MicroField& dpsi_dt,
                          const PotentialField& phi, const VelocityGrid& grid, double eps,
                          const CollisionContext& ctx);

/// The eps -> 0 system residual: v d_x(rho) - 2 v rho d_x(phi) - Q(psi).
MicroField limit_residual(const MacroField& rho, const MicroField& g, const PotentialField& phi,
                          const VelocityGrid& grid, const CollisionContext& ctx);

}  // namespace semikin
