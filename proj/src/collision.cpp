#include "semikin/collision.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace semikin {

double maxwellian(double v) { return std::exp(-v * v) / std::sqrt(M_PI); }

ScatteringKernel ScatteringKernel::constant(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("ScatteringKernel: sigma must be positive");
    ScatteringKernel k;
    k.kind = Kind::Constant;
    k.value = sigma;
    return k;
}

ScatteringKernel ScatteringKernel::tabulated(std::vector<double> table, int n) {
    if ((int)table.size() != n * n)
        throw std::invalid_argument("ScatteringKernel: table must be n x n");
    ScatteringKernel k;
    k.kind = Kind::Tabulated;
    k.table = std::move(table);
    k.symmetric = true;
    for (int i = 0; i < n && k.symmetric; ++i)
        for (int j = 0; j < n; ++j) {
            if (!(k.table[i * n + j] > 0.0))
                throw std::invalid_argument("ScatteringKernel: sigma(v,w) must be positive everywhere");
            if (std::abs(k.table[i * n + j] - k.table[j * n + i]) > 1e-12) {
                k.symmetric = false;
                break;
            }
        }
    return k;
}

ScatteringKernel load_kernel_csv(const std::string& path, int n_nodes) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_kernel_csv: cannot open " + path);
    std::vector<double> table;
    table.reserve(n_nodes * n_nodes);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int cols = 0;
        while (std::getline(ss, cell, ',')) {
            table.push_back(std::stod(cell));
            ++cols;
        }
        if (cols != n_nodes)
            throw std::invalid_argument("load_kernel_csv: row " + std::to_string(rows) + " has " +
                                        std::to_string(cols) + " columns, expected " + std::to_string(n_nodes));
        ++rows;
    }
    if (rows != n_nodes)
        throw std::invalid_argument("load_kernel_csv: expected " + std::to_string(n_nodes) + " rows, got " +
                                    std::to_string(rows));
    return ScatteringKernel::tabulated(std::move(table), n_nodes);
}

CollisionContext::CollisionContext(VelocityGrid g, ScatteringKernel k)
    : grid(std::move(g)), kernel(std::move(k)) {
    const int n = grid.n_nodes;
    if (kernel.kind == ScatteringKernel::Kind::Tabulated && (int)kernel.table.size() != n * n)
        throw std::invalid_argument("CollisionContext: kernel table size does not match grid");
    lambda_nodes.resize(n);
    maxwellian_nodes.resize(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += kernel.sigma(i, j, n) * grid.weights[j];
        lambda_nodes[i] = s;
        maxwellian_nodes[i] = maxwellian(grid.nodes[i]);
    }
}

double collision_frequency(const CollisionContext& ctx, int node) {
    return ctx.lambda_nodes.at(node);
}

std::vector<double> apply_Q_psi(const CollisionContext& ctx, const std::vector<double>& psi_nodes) {
    const int n = ctx.grid.n_nodes;
    if ((int)psi_nodes.size() != n) throw std::invalid_argument("apply_Q_psi: psi_nodes length != n_nodes");
    std::vector<double> out(n);
    if (ctx.kernel.kind == ScatteringKernel::Kind::Constant) {
        // sigma constant: Q/M = sigma (<psi>_w - psi)
        double mean = 0.0;
        for (int j = 0; j < n; ++j) mean += psi_nodes[j] * ctx.grid.weights[j];
        for (int i = 0; i < n; ++i) out[i] = ctx.kernel.value * (mean - psi_nodes[i]);
    } else {
        for (int i = 0; i < n; ++i) {
            double gain = 0.0;
            for (int j = 0; j < n; ++j)
                gain += ctx.kernel.table[i * n + j] * psi_nodes[j] * ctx.grid.weights[j];
            out[i] = gain - ctx.lambda_nodes[i] * psi_nodes[i];
        }
    }
    return out;
}

double mobility_constant(const CollisionContext& ctx) {
    double t = 0.0;
    for (int j = 0; j < ctx.grid.n_nodes; ++j) {
        if (!(ctx.lambda_nodes[j] > 0.0))
            throw std::runtime_error("mobility_constant: collision frequency must be positive");
        double v = ctx.grid.nodes[j];
        t += v * v / ctx.lambda_nodes[j] * ctx.grid.weights[j];
    }
    return t;
}

}  // namespace semikin
