#pragma once

#include <vector>

namespace semikin {

/// Gauss-Hermite velocity grid normalized against the Maxwellian
/// M(v) = pi^{-1/2} exp(-v^2).  The quadrature satisfies
///   sum_j p(v_j) w_j = int p(v) M(v) dv
/// exactly for polynomials p of degree <= 2*n_nodes - 1, with sum_j w_j = 1.
/// The basis h_k is orthonormal in L^2(M dv): h_0 = 1, h_1 = sqrt(2) v, ...
struct VelocityGrid {
    int n_nodes = 0;
    int order = 0;                           // expansion order N, 1 <= N <= n_nodes-1
    std::vector<double> nodes;               // v_j, ascending
    std::vector<double> weights;             // w_j, sum = 1
    std::vector<double> basis;               // basis[k*n_nodes + j] = h_k(v_j), k = 0..N
    std::vector<double> deriv;               // deriv[i*n_nodes + j] = C_j(v_i)

    double h(int k, int j) const { return basis[k * n_nodes + j]; }
    double d(int i, int j) const { return deriv[i * n_nodes + j]; }
};

/// Nodes and weights from the eigen-decomposition of the Jacobi matrix of
/// the Hermite recurrence (Golub-Welsch); weights renormalized to sum to 1.
VelocityGrid build_velocity_grid(int n_nodes, int order);
VelocityGrid build_velocity_grid(int n_nodes);   // order = n_nodes - 1

/// h_k(v): orthonormal Hermite basis under the Maxwellian weight.
double hermite_eval(int k, double v);

/// Coefficients psi_k = sum_j psi(v_j) h_k(v_j) w_j, k = 0..order.
std::vector<double> analyze(const VelocityGrid& grid, const std::vector<double>& psi_nodes);

/// psi(v) = sum_k coeffs[k] h_k(v).
double synthesize(const VelocityGrid& grid, const std::vector<double>& coeffs, double v);
double synthesize_at_node(const VelocityGrid& grid, const std::vector<double>& coeffs, int node);

/// (d/dv psi) at all nodes via the precomputed stencil C.
std::vector<double> apply_v_derivative(const VelocityGrid& grid, const std::vector<double>& psi_nodes);

}  // namespace semikin
