#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semikin/collision.hpp"
#include "semikin/losses.hpp"
#include "semikin/refsolver.hpp"

namespace semikin {

enum class ProblemKind { Semiconductor, Bp };

struct ProblemConfig {
    ProblemKind kind = ProblemKind::Semiconductor;
    double eps = 1.0;

    // scattering kernel
    double sigma = 2.0;
    std::string kernel_csv;          // non-empty: tabulated kernel from CSV

    // domain
    double x_lo = 0.0;
    double x_hi = 1.0;
    double t_final = 0.1;

    // Boltzmann-Poisson data
    double beta = 0.002;
    double voltage = 5.0;

    // velocity discretization
    int n_nodes = 8;
    int order = 7;

    // reference solver grid
    double dx = 0.01;
    double dt = 5e-5;
    int snapshot_stride = 100;       // 0.005 at the default dt

    // training collocation
    int colloc_nx = 99;
    int colloc_nt = 20;

    uint64_t seed = 0;
};

/// Resolved problem: grid, collision context, solver config, collocation,
/// and the given potential / doping profiles.
struct Problem {
    ProblemConfig cfg;
    VelocityGrid grid;
    CollisionContext ctx;
    SolverConfig solver;
    CollocationSet colloc;
    std::vector<double> f_ic_nodes;   // f_IC at the velocity nodes (space-independent)
    std::vector<double> f_bc_left;    // F_L at every node
    std::vector<double> f_bc_right;

    bool has_phi_net() const { return cfg.kind == ProblemKind::Bp; }
    double phi(double x) const;       // Problem I given potential
    double phi_x(double x) const;
    double doping(double x) const;
};

Problem make_problem(const ProblemConfig& cfg);

/// Reference solve with the problem's solver settings.
Trajectory reference_trajectory(const Problem& prob);
/// Drift-diffusion limit solve with T from the problem's kernel.
Trajectory limit_trajectory(const Problem& prob);

enum class ObsScenario { Full, Partial };

struct Observations {
    struct RhoSample { double t, x, rho; };
    struct GSample { double t, x; int node; double g; };   // physical g = psi M
    struct FSample { double t, x; int node; double f; };
    struct PhiSample { double t, x, phi; };
    std::vector<RhoSample> rho;
    std::vector<GSample> g;
    std::vector<FSample> f;
    std::vector<PhiSample> phi;
};

/// n_samples uniform draws over the snapshot x grid points (and velocity
/// nodes for g/f), seed-deterministic.  Full scenario emits rho, g and f
/// (plus phi for BP trajectories); partial emits rho only (rho and phi for BP).
Observations generate_observations(const Trajectory& traj, const VelocityGrid& grid,
                                   ObsScenario scenario, int n_samples, uint64_t seed, double eps);

/// Canonical ordering by (t, x, node): training is invariant under
/// permutations of the stored files.
void sort_observations(Observations& obs);

void write_observations(const Observations& obs, const std::string& dir);
Observations read_observations(const std::string& dir, ObsScenario scenario, bool bp);

}  // namespace semikin
