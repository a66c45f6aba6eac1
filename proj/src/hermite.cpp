#include "semikin/hermite.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace semikin {

double hermite_eval(int k, double v) {
    // h_{j+1} = v sqrt(2/(j+1)) h_j - sqrt(j/(j+1)) h_{j-1},  h_0 = 1.
    double hm = 0.0;
    double h0 = 1.0;
    for (int j = 0; j < k; ++j) {
        double hp = v * std::sqrt(2.0 / (j + 1)) * h0 - std::sqrt(double(j) / (j + 1)) * hm;
        hm = h0;
        h0 = hp;
    }
    return h0;
}

VelocityGrid build_velocity_grid(int n_nodes, int order) {
    if (n_nodes <= 0) throw std::invalid_argument("build_velocity_grid: n_nodes must be positive");
    if (order < 0 || order >= n_nodes)
        throw std::invalid_argument("build_velocity_grid: need 0 <= order <= n_nodes-1");

    VelocityGrid g;
    g.n_nodes = n_nodes;
    g.order = order;
    g.nodes.resize(n_nodes);
    g.weights.resize(n_nodes);

    if (n_nodes == 1) {
        g.nodes[0] = 0.0;
        g.weights[0] = 1.0;
    } else {
        // Jacobi matrix of v h_k = sqrt((k+1)/2) h_{k+1} + sqrt(k/2) h_{k-1}:
        // zero diagonal, off-diagonal beta_k = sqrt(k/2).
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
        for (int k = 1; k < n_nodes; ++k) {
            double beta = std::sqrt(0.5 * k);
            J(k, k - 1) = beta;
            J(k - 1, k) = beta;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("build_velocity_grid: Jacobi eigen-decomposition failed");
        for (int j = 0; j < n_nodes; ++j) {
            g.nodes[j] = es.eigenvalues()(j);
            double q0 = es.eigenvectors()(0, j);
            g.weights[j] = q0 * q0;          // mu_0 = int M dv = 1
        }
        // Symmetrize: pair v_j with -v_{n-1-j} and average out eigensolver noise.
        for (int j = 0; j < n_nodes / 2; ++j) {
            int m = n_nodes - 1 - j;
            double v = 0.5 * (g.nodes[m] - g.nodes[j]);
            g.nodes[j] = -v;
            g.nodes[m] = v;
            double w = 0.5 * (g.weights[j] + g.weights[m]);
            g.weights[j] = w;
            g.weights[m] = w;
        }
        if (n_nodes % 2 == 1) g.nodes[n_nodes / 2] = 0.0;
        double wsum = 0.0;
        for (double w : g.weights) wsum += w;
        for (double& w : g.weights) w /= wsum;
    }

    g.basis.assign((order + 1) * n_nodes, 0.0);
    for (int k = 0; k <= order; ++k)
        for (int j = 0; j < n_nodes; ++j) g.basis[k * n_nodes + j] = hermite_eval(k, g.nodes[j]);

    // C_j(v_i) = sum_{k=0}^{N} sqrt(2k) h_k(v_j) h_{k-1}(v_i) w_j
    g.deriv.assign(n_nodes * n_nodes, 0.0);
    for (int i = 0; i < n_nodes; ++i) {
        for (int j = 0; j < n_nodes; ++j) {
            double s = 0.0;
            for (int k = 1; k <= order; ++k)
                s += std::sqrt(2.0 * k) * g.h(k, j) * hermite_eval(k - 1, g.nodes[i]) * g.weights[j];
            g.deriv[i * n_nodes + j] = s;
        }
    }
    return g;
}

VelocityGrid build_velocity_grid(int n_nodes) { return build_velocity_grid(n_nodes, n_nodes - 1); }

std::vector<double> analyze(const VelocityGrid& grid, const std::vector<double>& psi_nodes) {
    if ((int)psi_nodes.size() != grid.n_nodes)
        throw std::invalid_argument("analyze: psi_nodes length != n_nodes");
    std::vector<double> coeffs(grid.order + 1, 0.0);
    for (int k = 0; k <= grid.order; ++k) {
        double s = 0.0;
        for (int j = 0; j < grid.n_nodes; ++j) s += psi_nodes[j] * grid.h(k, j) * grid.weights[j];
        coeffs[k] = s;
    }
    return coeffs;
}

double synthesize(const VelocityGrid& grid, const std::vector<double>& coeffs, double v) {
    if ((int)coeffs.size() != grid.order + 1)
        throw std::invalid_argument("synthesize: coeffs length != order+1");
    double s = 0.0;
    double hm = 0.0, h0 = 1.0;
    for (int k = 0; k <= grid.order; ++k) {
        s += coeffs[k] * h0;
        double hp = v * std::sqrt(2.0 / (k + 1)) * h0 - std::sqrt(double(k) / (k + 1)) * hm;
        hm = h0;
        h0 = hp;
    }
    return s;
}

double synthesize_at_node(const VelocityGrid& grid, const std::vector<double>& coeffs, int node) {
    if ((int)coeffs.size() != grid.order + 1)
        throw std::invalid_argument("synthesize_at_node: coeffs length != order+1");
    double s = 0.0;
    for (int k = 0; k <= grid.order; ++k) s += coeffs[k] * grid.h(k, node);
    return s;
}

std::vector<double> apply_v_derivative(const VelocityGrid& grid, const std::vector<double>& psi_nodes) {
    if ((int)psi_nodes.size() != grid.n_nodes)
        throw std::invalid_argument("apply_v_derivative: psi_nodes length != n_nodes");
    std::vector<double> out(grid.n_nodes, 0.0);
    for (int i = 0; i < grid.n_nodes; ++i) {
        double s = 0.0;
        for (int j = 0; j < grid.n_nodes; ++j) s += grid.d(i, j) * psi_nodes[j];
        out[i] = s;
    }
    return out;
}

}  // namespace semikin
