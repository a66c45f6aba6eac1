#pragma once

#include <vector>

#include "semikin/collision.hpp"
#include "semikin/net.hpp"
#include "semikin/tape.hpp"

namespace semikin {

/// Penalty weights: lambda1/lambda2 for BC/IC, omega_d for data misfits.
struct LossWeights {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double w_rho = 1.0;
    double w_g = 1.0;
    double w_f = 1.0;
    double w_phi = 1.0;
    double w_poisson = 1.0;
};

struct LossBreakdown {
    double ge_macro = 0.0;   // PINN stores its single residual term under ge_micro
    double ge_micro = 0.0;
    double bc = 0.0;
    double ic = 0.0;
    double data_rho = 0.0;
    double data_g = 0.0;
    double data_f = 0.0;
    double data_phi = 0.0;
    double poisson = 0.0;
    double total = 0.0;
    LossWeights weights;
    int id_total = -1;       // tape id of the total (for gradients)
};

/// Learnable scattering scalar: tape leaf id, or -1 to use the context kernel.
struct SigmaRef {
    int leaf = -1;
};

/// Tensor-grid collocation: interior times x interior x points, the velocity
/// nodes, boundary times at both ends (incoming nodes), initial x points.
struct CollocationSet {
    std::vector<double> t_interior;
    std::vector<double> x_interior;
    std::vector<double> t_boundary;
    std::vector<double> x_initial;
    double x_left = 0.0;
    double x_right = 1.0;
    double bc_dt = 0.0;   // the Delta t factor of the discretized boundary integral

    int n1() const { return (int)(t_interior.size() * x_interior.size()); }
    int n2(int n_nodes) const { return n1() * n_nodes; }
    int n3(int n_nodes) const { return (int)t_boundary.size() * n_nodes; }
    int n4(int n_nodes) const { return (int)x_initial.size() * n_nodes; }
};

/// nt interior times of (0, t_final] and nx interior x points of (x_lo, x_hi),
/// evenly spaced; boundary times = interior times; bc_dt = t_final / nt.
CollocationSet make_collocation(double t_final, int nt, double x_lo, double x_hi, int nx);

/// (Q/M) psi as tape nodes at one spatial point.
std::vector<int> q_psi_ids(Tape& tape, const std::vector<int>& psi_ids, SigmaRef sigma,
                           const CollisionContext& ctx);

/// Spectral velocity derivative (C psi) as tape nodes.
std::vector<int> spectral_dv_ids(Tape& tape, const std::vector<int>& psi_ids, const VelocityGrid& grid);

/// Everything the APNN risk consumes, as tape samples.  rho samples are
/// post-head (positive); g samples are post-head (mass-conserving).
struct ApnnSamples {
    // interior (size n1), ordered t-major then x
    std::vector<FieldSample> rho;
    std::vector<GHeadSample> g;
    std::vector<int> phi_x;                      // tape ids
    // boundary (size |t_boundary|)
    std::vector<FieldSample> rho_bc_left, rho_bc_right;
    std::vector<GHeadSample> g_bc_left, g_bc_right;
    std::vector<double> f_bc_left, f_bc_right;   // F at every node, reflection folded in
    // initial (size |x_initial|)
    std::vector<FieldSample> rho_ic;
    std::vector<GHeadSample> g_ic;
    std::vector<std::vector<double>> f_ic;       // f_IC at nodes per point
};

/// The APNN empirical risk.  eps = 0 is legal and assembles exactly the
/// limit-system loss (the eps-scaled terms are never emitted), which is the
/// discrete AP property of the loss.
LossBreakdown apnn_loss(Tape& tape, const ApnnSamples& s, double eps, SigmaRef sigma,
                        const CollisionContext& ctx, const CollocationSet& colloc,
                        const LossWeights& w);

/// The eps -> 0 limit-system loss (identical code path to apnn_loss at eps = 0).
LossBreakdown limit_loss(Tape& tape, const ApnnSamples& s, SigmaRef sigma, const CollisionContext& ctx,
                         const CollocationSet& colloc, const LossWeights& w);

/// PINN samples: raw psi_f = f/M at every velocity node (no post-processing).
struct PinnSamples {
    std::vector<std::vector<FieldSample>> psi;           // interior per point per node
    std::vector<int> phi_x;
    std::vector<std::vector<FieldSample>> psi_bc_left, psi_bc_right;
    std::vector<double> f_bc_left, f_bc_right;
    std::vector<std::vector<FieldSample>> psi_ic;
    std::vector<std::vector<double>> f_ic;
};

/// The PINN empirical risk; the governing-equation residual is assembled in
/// psi-space (divided by M).  Rejects eps = 0 (the 1/eps collision term).
LossBreakdown pinn_loss(Tape& tape, const PinnSamples& s, double eps, SigmaRef sigma,
                        const CollisionContext& ctx, const CollocationSet& colloc,
                        const LossWeights& w);

struct DataLossIds {
    int total = -1;
    double rho_part = 0.0;
    double g_part = 0.0;
};

/// APNN data misfit: mean-square rho mismatch plus (full observation only)
/// mean-square g mismatch in g-space; g_obs holds physical g = psi M values.
DataLossIds data_loss_apnn(Tape& tape, const std::vector<FieldSample>& rho_pred,
                           const std::vector<double>& rho_obs,
                           const std::vector<GHeadSample>& g_pred, const std::vector<int>& g_node,
                           const std::vector<double>& g_obs, const VelocityGrid& grid,
                           const LossWeights& w, bool partial);

/// PINN data misfit over f samples; f_obs in f-space, psi_pred at the sample node.
int data_loss_pinn(Tape& tape, const std::vector<FieldSample>& psi_pred, const std::vector<int>& f_node,
                   const std::vector<double>& f_obs, const VelocityGrid& grid, const LossWeights& w);

/// Potential data misfit for the BP inverse problem.
int data_loss_phi(Tape& tape, const std::vector<int>& phi_pred, const std::vector<double>& phi_obs,
                  const LossWeights& w);

}  // namespace semikin
