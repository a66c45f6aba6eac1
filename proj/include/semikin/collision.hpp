#pragma once

#include <string>
#include <vector>

#include "semikin/hermite.hpp"

namespace semikin {

/// Scattering coefficient sigma(v, w) > 0 for the electron-phonon collision
/// operator.  Either a constant or a matrix tabulated at the grid nodes.
struct ScatteringKernel {
    enum class Kind { Constant, Tabulated };
    Kind kind = Kind::Constant;
    double value = 2.0;
    std::vector<double> table;   // row-major n x n, table[i*n+j] = sigma(v_i, v_j)
    bool symmetric = true;

    static ScatteringKernel constant(double sigma);
    static ScatteringKernel tabulated(std::vector<double> table, int n);
    double sigma(int i, int j, int n) const {
        return kind == Kind::Constant ? value : table[i * n + j];
    }
};

/// Kernel matrix from a CSV file; row i holds sigma(v_i, v_0..v_{n-1}).
ScatteringKernel load_kernel_csv(const std::string& path, int n_nodes);

/// Velocity grid plus kernel with the precomputed collision frequency
/// lambda(v_i) = sum_j sigma(v_i, v_j) w_j and Maxwellian samples.
struct CollisionContext {
    VelocityGrid grid;
    ScatteringKernel kernel;
    std::vector<double> lambda_nodes;
    std::vector<double> maxwellian_nodes;

    CollisionContext(VelocityGrid g, ScatteringKernel k);
};

double collision_frequency(const CollisionContext& ctx, int node);

/// Q(g)/M at the nodes for g = psi M:
///   (Q/M)(v_i) = sum_j sigma(v_i, v_j) psi(v_j) w_j - lambda(v_i) psi(v_i).
/// All kinetic quantities pass through this module in psi-space; M never
/// divides anything at runtime.
std::vector<double> apply_Q_psi(const CollisionContext& ctx, const std::vector<double>& psi_nodes);

/// T = sum_j v_j^2 / lambda(v_j) w_j (mobility of the drift-diffusion limit).
double mobility_constant(const CollisionContext& ctx);

/// M(v) = pi^{-1/2} exp(-v^2).
double maxwellian(double v);

}  // namespace semikin
