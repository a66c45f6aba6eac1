#include "semikin/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace semikin {

namespace {
constexpr double kDopingRho0 = 1.0;   // rho(0, t=0): Maxwellian IC integrates to 1
}

double Problem::phi(double x) const {
    if (cfg.kind == ProblemKind::Bp) return 0.0;
    const double u = 0.25 - x;
    return std::exp(-50.0 * std::exp(1.0) * u * u);
}

double Problem::phi_x(double x) const {
    if (cfg.kind == ProblemKind::Bp) return 0.0;
    const double u = 0.25 - x;
    return 100.0 * std::exp(1.0) * u * phi(x);
}

double Problem::doping(double x) const {
    const double m = (1.0 - 0.001) / 2.0;
    return 1.0 - (1.0 - m) * kDopingRho0 *
                     (std::tanh((x - 0.3) / 0.02) - std::tanh((x - 0.7) / 0.02));
}

Problem make_problem(const ProblemConfig& cfg) {
    if (!(cfg.eps >= 0.0)) throw std::invalid_argument("problem: eps must be nonnegative");
    VelocityGrid grid = build_velocity_grid(cfg.n_nodes, cfg.order);
    ScatteringKernel kernel = cfg.kernel_csv.empty()
                                  ? ScatteringKernel::constant(cfg.sigma)
                                  : load_kernel_csv(cfg.kernel_csv, cfg.n_nodes);
    Problem prob{cfg, grid, CollisionContext(grid, kernel), {}, {}, {}, {}, {}};

    const int nx = (int)std::lround((cfg.x_hi - cfg.x_lo) / cfg.dx) + 1;
    SolverConfig& s = prob.solver;
    s.eps = cfg.eps > 0.0 ? cfg.eps : 1e-8;   // the kinetic solver needs eps > 0
    s.dx = cfg.dx;
    s.dt = cfg.dt;
    s.t_final = cfg.t_final;
    s.x_lo = cfg.x_lo;
    s.x_hi = cfg.x_hi;
    s.bc = BcKind::Inflow;
    s.snapshot_stride = cfg.snapshot_stride;
    s.rho_ic.assign(nx, 1.0);                 // <f_IC> = <M> = 1

    prob.f_ic_nodes.resize(cfg.n_nodes);
    prob.f_bc_left.resize(cfg.n_nodes);
    prob.f_bc_right.resize(cfg.n_nodes);
    for (int j = 0; j < cfg.n_nodes; ++j) {
        const double mj = maxwellian(grid.nodes[j]);
        prob.f_ic_nodes[j] = mj;       // f_IC = M
        prob.f_bc_left[j] = mj;        // F_L = F_R = M (stationary-compatible inflow)
        prob.f_bc_right[j] = mj;
    }
    s.inflow_left = prob.f_bc_left;
    s.inflow_right = prob.f_bc_right;

    if (cfg.kind == ProblemKind::Bp) {
        s.poisson_enabled = true;
        s.beta = cfg.beta;
        s.voltage = cfg.voltage;
        s.doping.resize(nx);
        for (int i = 0; i < nx; ++i) s.doping[i] = prob.doping(cfg.x_lo + i * cfg.dx);
    } else {
        s.phi_fixed.resize(nx);
        for (int i = 0; i < nx; ++i) s.phi_fixed[i] = prob.phi(cfg.x_lo + i * cfg.dx);
    }

    prob.colloc = make_collocation(cfg.t_final, cfg.colloc_nt, cfg.x_lo, cfg.x_hi, cfg.colloc_nx);
    return prob;
}

Trajectory reference_trajectory(const Problem& prob) { return run(prob.solver, prob.ctx); }

Trajectory limit_trajectory(const Problem& prob) {
    SolverConfig cfg = prob.solver;
    const double t_mob = mobility_constant(prob.ctx);
    const double dt_max = cfg.dx * cfg.dx / (4.0 * t_mob);
    if (cfg.dt > dt_max) {
        long n = (long)std::ceil(cfg.dt / dt_max);
        cfg.dt /= n;
        cfg.snapshot_stride *= n;
    }
    return solve_drift_diffusion(cfg, t_mob);
}

Observations generate_observations(const Trajectory& traj, const VelocityGrid& grid,
                                   ObsScenario scenario, int n_samples, uint64_t seed, double eps) {
    const int ns = traj.n_snapshots();
    if (ns == 0) throw std::invalid_argument("generate_observations: empty trajectory");
    const int nx = traj.rho[0].n();
    const int nv = grid.n_nodes;
    if (n_samples > ns * nx)
        throw std::invalid_argument("generate_observations: n_samples exceeds available grid points");
    const bool bp = traj.has_phi && !traj.phi[0].values.empty();
    const bool has_psi = !traj.psi.empty() && traj.psi[0].n_x == nx;

    std::mt19937_64 gen(seed);
    Observations obs;
    for (int k = 0; k < n_samples; ++k) {
        int s = (int)(gen() % (uint64_t)ns);
        int i = (int)(gen() % (uint64_t)nx);
        obs.rho.push_back({traj.times[s], traj.x(i), traj.rho[s].values[i]});
        if (bp) obs.phi.push_back({traj.times[s], traj.x(i), traj.phi[s].values[i]});
    }
    if (scenario == ObsScenario::Full) {
        if (!has_psi) throw std::invalid_argument("generate_observations: trajectory has no micro field");
        for (int k = 0; k < n_samples; ++k) {
            int s = (int)(gen() % (uint64_t)ns);
            int i = (int)(gen() % (uint64_t)nx);
            int j = (int)(gen() % (uint64_t)nv);
            const double g = traj.psi[s].at(i, j) * maxwellian(grid.nodes[j]);
            const double f = traj.rho[s].values[i] * maxwellian(grid.nodes[j]) + eps * g;
            obs.g.push_back({traj.times[s], traj.x(i), j, g});
            obs.f.push_back({traj.times[s], traj.x(i), j, f});
        }
    }
    return obs;
}

void sort_observations(Observations& obs) {
    auto lt3 = [](const auto& a, const auto& b) { return a.t != b.t ? a.t < b.t : a.x < b.x; };
    auto lt4 = [](const auto& a, const auto& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.x != b.x) return a.x < b.x;
        return a.node < b.node;
    };
    std::stable_sort(obs.rho.begin(), obs.rho.end(), lt3);
    std::stable_sort(obs.phi.begin(), obs.phi.end(), lt3);
    std::stable_sort(obs.g.begin(), obs.g.end(), lt4);
    std::stable_sort(obs.f.begin(), obs.f.end(), lt4);
}

namespace {

void write_rows(const std::string& path, const std::string& header,
                const std::vector<std::vector<double>>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_observations: cannot open " + path);
    f << header << "\n";
    char buf[32];
    for (const auto& r : rows) {
        for (size_t c = 0; c < r.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", r[c]);
            f << (c ? "," : "") << buf;
        }
        f << "\n";
    }
}

std::vector<std::vector<double>> read_rows(const std::string& path, size_t n_cols) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_observations: cannot open " + path);
    std::string line;
    std::getline(f, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> r;
        while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
        if (r.size() != n_cols)
            throw std::runtime_error("read_observations: bad column count in " + path);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

void write_observations(const Observations& obs, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::vector<double>> rows;
    for (const auto& s : obs.rho) rows.push_back({s.t, s.x, s.rho});
    write_rows(dir + "/obs_rho.csv", "t,x,rho", rows);
    rows.clear();
    for (const auto& s : obs.g) rows.push_back({s.t, s.x, (double)s.node, s.g});
    write_rows(dir + "/obs_g.csv", "t,x,node,g", rows);
    rows.clear();
    for (const auto& s : obs.f) rows.push_back({s.t, s.x, (double)s.node, s.f});
    write_rows(dir + "/obs_f.csv", "t,x,node,f", rows);
    if (!obs.phi.empty()) {
        rows.clear();
        for (const auto& s : obs.phi) rows.push_back({s.t, s.x, s.phi});
        write_rows(dir + "/obs_phi.csv", "t,x,phi", rows);
    }
}

Observations read_observations(const std::string& dir, ObsScenario scenario, bool bp) {
    Observations obs;
    for (const auto& r : read_rows(dir + "/obs_rho.csv", 3)) obs.rho.push_back({r[0], r[1], r[2]});
    if (scenario == ObsScenario::Full) {
        for (const auto& r : read_rows(dir + "/obs_g.csv", 4))
            obs.g.push_back({r[0], r[1], (int)r[2], r[3]});
        for (const auto& r : read_rows(dir + "/obs_f.csv", 4))
            obs.f.push_back({r[0], r[1], (int)r[2], r[3]});
    }
    if (bp)
        for (const auto& r : read_rows(dir + "/obs_phi.csv", 3)) obs.phi.push_back({r[0], r[1], r[2]});
    sort_observations(obs);
    return obs;
}

}  // namespace semikin
