#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semikin/collision.hpp"
#include "semikin/micromacro.hpp"

namespace semikin {

enum class BcKind { Inflow, Periodic };

/// Discretization and problem data for the kinetic reference solver.
/// The spatial grid is x_0..x_{Nx} with dx = 1/Nx on [x_lo, x_hi].
struct SolverConfig {
    double eps = 1.0;
    double dx = 0.01;
    double dt = 5e-5;
    double t_final = 0.1;
    double x_lo = 0.0;
    double x_hi = 1.0;
    BcKind bc = BcKind::Inflow;

    std::vector<double> inflow_left;    // F_L(v_j) in f-space (node vector)
    std::vector<double> inflow_right;   // F_R at node v_j (reflection folded in)

    std::vector<double> rho_ic;         // density IC on the grid
    std::vector<double> psi_ic;         // optional micro IC, row-major [x][v]; empty = 0

    bool poisson_enabled = false;
    double beta = 0.002;                // scaled Debye length
    double voltage = 0.0;               // phi(x_hi) Dirichlet value
    std::vector<double> doping;         // c(x) on the grid (Poisson runs)
    std::vector<double> phi_fixed;      // static potential on the grid (non-Poisson runs)

    int snapshot_stride = 100;          // record every k-th step

    int n_x() const { return (int)rho_ic.size(); }
};

/// rho lives on the nodes x_0..x_{Nx}; the micro field is staggered at the
/// half-points x_{i+1/2}, i = 0..Nx-1, so the eps -> 0 limit of the scheme
/// is the compact three-point drift-diffusion discretization.
struct KineticState {
    MacroField rho;
    MicroField psi;          // [Nx][n_v] at half-points
    PotentialField phi;      // at nodes
    double t0 = 0.0;
    long step_count = 0;
    double dt = 0.0;
    double time() const { return t0 + step_count * dt; }
};

/// Micro field averaged back to the nodes (ends copy the adjacent half-point).
MicroField psi_at_nodes(const KineticState& state);

struct Trajectory {
    std::vector<double> times;
    std::vector<MacroField> rho;
    std::vector<PotentialField> phi;
    std::vector<MicroField> psi;
    double x_lo = 0.0;
    double dx = 0.0;
    bool has_phi = false;

    int n_snapshots() const { return (int)times.size(); }
    double x(int i) const { return x_lo + i * dx; }
};

/// beta (phi_{i-1} - 2 phi_i + phi_{i+1}) / dx^2 = rho_i - c_i, with
/// phi(x_lo) = 0 and phi(x_hi) = V; tridiagonal solve.
PotentialField solve_poisson(const MacroField& rho, const SolverConfig& cfg);

KineticState init_state(const SolverConfig& cfg, const CollisionContext& ctx);

/// One IMEX step: explicit transport/force terms, implicit collision,
/// discrete mean subtraction, then the explicit macro update.
KineticState step(const KineticState& state, const SolverConfig& cfg, const CollisionContext& ctx);

/// March `state` to t_end, recording every cfg.snapshot_stride steps (the
/// initial and final states are always recorded).
Trajectory run(const SolverConfig& cfg, const CollisionContext& ctx, KineticState state, double t_end);
Trajectory run(const SolverConfig& cfg, const CollisionContext& ctx);

/// Explicit drift-diffusion march d_t rho = T (d_xx rho - 2 d_x(rho d_x phi))
/// with the same boundary data as the kinetic solver; requires
/// dt <= dx^2 / (4 T).
Trajectory solve_drift_diffusion(const SolverConfig& cfg, double t_mobility);

/// CSV emission, 17 significant digits.  Header `t,x,rho[,phi]`.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
/// Header `t,x,v,psi`, one row per (t, x, v node).
void write_psi_csv(const Trajectory& traj, const VelocityGrid& grid, const std::string& path);

Trajectory read_trajectory_csv(const std::string& rho_path, const std::string& psi_path,
                               const VelocityGrid& grid);

}  // namespace semikin
