#include "semikin/losses.hpp"

#include <stdexcept>

namespace semikin {

CollocationSet make_collocation(double t_final, int nt, double x_lo, double x_hi, int nx) {
    if (nt <= 0 || nx <= 0) throw std::invalid_argument("make_collocation: counts must be positive");
    CollocationSet c;
    c.x_left = x_lo;
    c.x_right = x_hi;
    c.bc_dt = t_final / nt;
    for (int i = 1; i <= nt; ++i) c.t_interior.push_back(i * t_final / nt);
    for (int k = 1; k <= nx; ++k) c.x_interior.push_back(x_lo + k * (x_hi - x_lo) / (nx + 1));
    c.t_boundary = c.t_interior;
    c.x_initial = c.x_interior;
    for (double t : c.t_interior)
        if (t <= 0.0 || t > t_final) throw std::invalid_argument("make_collocation: time outside domain");
    for (double x : c.x_interior)
        if (x <= x_lo || x >= x_hi) throw std::invalid_argument("make_collocation: point outside domain");
    return c;
}

std::vector<int> q_psi_ids(Tape& tape, const std::vector<int>& psi_ids, SigmaRef sigma,
                           const CollisionContext& ctx) {
    const int n = ctx.grid.n_nodes;
    if ((int)psi_ids.size() != n) throw std::invalid_argument("q_psi_ids: node count mismatch");
    std::vector<int> out(n);
    if (sigma.leaf >= 0) {
        // learnable constant kernel: Q/M = sigma (<psi>_w - psi)
        int mean = tape.lin(psi_ids, ctx.grid.weights);
        for (int j = 0; j < n; ++j) out[j] = tape.mul(sigma.leaf, tape.sub(mean, psi_ids[j]));
    } else if (ctx.kernel.kind == ScatteringKernel::Kind::Constant) {
        int mean = tape.lin(psi_ids, ctx.grid.weights);
        for (int j = 0; j < n; ++j) out[j] = tape.scale(tape.sub(mean, psi_ids[j]), ctx.kernel.value);
    } else {
        std::vector<double> row(n);
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) row[k] = ctx.kernel.table[j * n + k] * ctx.grid.weights[k];
            int gain = tape.lin(psi_ids, row);
            out[j] = tape.sub(gain, tape.scale(psi_ids[j], ctx.lambda_nodes[j]));
        }
    }
    return out;
}

std::vector<int> spectral_dv_ids(Tape& tape, const std::vector<int>& psi_ids, const VelocityGrid& grid) {
    const int n = grid.n_nodes;
    std::vector<int> out(n);
    std::vector<double> row(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) row[j] = grid.d(i, j);
        out[i] = tape.lin(psi_ids, row);
    }
    return out;
}

namespace {

int mean_of_squares(Tape& tape, const std::vector<int>& residuals) {
    std::vector<int> squares(residuals.size());
    for (size_t k = 0; k < residuals.size(); ++k) squares[k] = tape.square(residuals[k]);
    return tape.scale(tape.sum(squares), 1.0 / (double)residuals.size());
}

// Weighted sum of squares (already includes per-sample factors), then / count.
int mean_weighted_squares(Tape& tape, const std::vector<int>& residuals, const std::vector<double>& factors) {
    std::vector<int> squares(residuals.size());
    for (size_t k = 0; k < residuals.size(); ++k) squares[k] = tape.square(residuals[k]);
    return tape.scale(tape.lin(squares, factors), 1.0 / (double)residuals.size());
}

}  // namespace

LossBreakdown apnn_loss(Tape& tape, const ApnnSamples& s, double eps, SigmaRef sigma,
                        const CollisionContext& ctx, const CollocationSet& colloc,
                        const LossWeights& w) {
    const VelocityGrid& grid = ctx.grid;
    const int nv = grid.n_nodes;
    const int n1 = colloc.n1();
    if ((int)s.rho.size() != n1 || (int)s.g.size() != n1 || (int)s.phi_x.size() != n1)
        throw std::invalid_argument("apnn_loss: interior sample count mismatch");
    const bool with_eps = eps != 0.0;

    // term 1: macro residual, term 2: micro residual
    std::vector<int> macro_res;
    macro_res.reserve(n1);
    std::vector<int> micro_res;
    micro_res.reserve((size_t)n1 * nv);
    std::vector<int> psi_ids(nv), psi_dx(nv), psi_dt(nv);
    for (int p = 0; p < n1; ++p) {
        const FieldSample& rho = s.rho[p];
        const GHeadSample& g = s.g[p];
        const int phi_x = s.phi_x[p];
        for (int j = 0; j < nv; ++j) {
            psi_ids[j] = g.psi[j].value;
            psi_dx[j] = g.psi[j].dx;
            psi_dt[j] = g.psi[j].dt;
        }

        // d_t rho + d_x<v g> + d_x(phi) <d_v g>
        std::vector<double> vw(nv);
        for (int j = 0; j < nv; ++j) vw[j] = grid.nodes[j] * grid.weights[j];
        int dflux = tape.lin(psi_dx, vw);
        int dvg_mean = tape.lin(g.dv_g, grid.weights);
        macro_res.push_back(tape.sum({rho.dt, dflux, tape.mul(phi_x, dvg_mean)}));

        // micro residual per node
        std::vector<int> q = q_psi_ids(tape, psi_ids, sigma, ctx);
        std::vector<int> trans(nv);
        int tmean = -1;
        if (with_eps) {
            for (int j = 0; j < nv; ++j)
                trans[j] = tape.add(tape.scale(psi_dx[j], grid.nodes[j]), tape.mul(phi_x, g.dv_g[j]));
            tmean = tape.lin(trans, grid.weights);
        }
        for (int j = 0; j < nv; ++j) {
            const double v = grid.nodes[j];
            int r = tape.sub(tape.sub(tape.scale(rho.dx, v),
                                      tape.scale(tape.mul(rho.value, phi_x), 2.0 * v)),
                             q[j]);
            if (with_eps) {
                int eps_terms = tape.add(tape.scale(psi_dt[j], eps * eps),
                                         tape.scale(tape.sub(trans[j], tmean), eps));
                r = tape.add(r, eps_terms);
            }
            micro_res.push_back(r);
        }
    }
    int ge_macro = mean_of_squares(tape, macro_res);
    int ge_micro = mean_of_squares(tape, micro_res);

    // term 3: boundary, f = rho M + eps g on incoming nodes, w_j dt factors
    const int nbt = (int)colloc.t_boundary.size();
    if ((int)s.rho_bc_left.size() != nbt || (int)s.g_bc_left.size() != nbt)
        throw std::invalid_argument("apnn_loss: boundary sample count mismatch");
    std::vector<int> bc_res;
    std::vector<double> bc_fac;
    auto bc_end = [&](const std::vector<FieldSample>& rho_bc, const std::vector<GHeadSample>& g_bc,
                      const std::vector<double>& f_bc, bool left) {
        for (int i = 0; i < nbt; ++i) {
            for (int j = 0; j < nv; ++j) {
                const double v = grid.nodes[j];
                if ((left && v <= 0.0) || (!left && v >= 0.0)) continue;
                const double mj = maxwellian(v);
                int f = tape.scale(rho_bc[i].value, mj);
                if (with_eps) f = tape.add(f, tape.scale(g_bc[i].psi[j].value, eps * mj));
                bc_res.push_back(tape.add_const(f, -f_bc[j]));
                bc_fac.push_back(grid.weights[j] * colloc.bc_dt);
            }
        }
    };
    bc_end(s.rho_bc_left, s.g_bc_left, s.f_bc_left, true);
    bc_end(s.rho_bc_right, s.g_bc_right, s.f_bc_right, false);
    int bc = mean_weighted_squares(tape, bc_res, bc_fac);

    // term 4: initial, f = rho M + eps g at all nodes
    const int nic = (int)colloc.x_initial.size();
    if ((int)s.rho_ic.size() != nic || (int)s.g_ic.size() != nic)
        throw std::invalid_argument("apnn_loss: initial sample count mismatch");
    std::vector<int> ic_res;
    ic_res.reserve((size_t)nic * nv);
    for (int k = 0; k < nic; ++k) {
        for (int j = 0; j < nv; ++j) {
            const double mj = maxwellian(grid.nodes[j]);
            int f = tape.scale(s.rho_ic[k].value, mj);
            if (with_eps) f = tape.add(f, tape.scale(s.g_ic[k].psi[j].value, eps * mj));
            ic_res.push_back(tape.add_const(f, -s.f_ic[k][j]));
        }
    }
    int ic = mean_of_squares(tape, ic_res);

    LossBreakdown out;
    out.weights = w;
    out.ge_macro = tape.val(ge_macro);
    out.ge_micro = tape.val(ge_micro);
    out.bc = tape.val(bc);
    out.ic = tape.val(ic);
    out.id_total = tape.lin({ge_macro, ge_micro, bc, ic}, {1.0, 1.0, w.lambda1, w.lambda2});
    out.total = tape.val(out.id_total);
    return out;
}

LossBreakdown limit_loss(Tape& tape, const ApnnSamples& s, SigmaRef sigma, const CollisionContext& ctx,
                         const CollocationSet& colloc, const LossWeights& w) {
    return apnn_loss(tape, s, 0.0, sigma, ctx, colloc, w);
}

LossBreakdown pinn_loss(Tape& tape, const PinnSamples& s, double eps, SigmaRef sigma,
                        const CollisionContext& ctx, const CollocationSet& colloc,
                        const LossWeights& w) {
    if (eps == 0.0)
        throw std::invalid_argument("pinn_loss: eps = 0 is singular (1/eps collision term)");
    const VelocityGrid& grid = ctx.grid;
    const int nv = grid.n_nodes;
    const int n1 = colloc.n1();
    if ((int)s.psi.size() != n1 || (int)s.phi_x.size() != n1)
        throw std::invalid_argument("pinn_loss: interior sample count mismatch");

    // governing equation in psi-space:
    // eps psi_t + v psi_x + phi_x (C psi - 2 v psi) - (1/eps) Q/M
    std::vector<int> ge_res;
    ge_res.reserve((size_t)n1 * nv);
    std::vector<int> psi_ids(nv);
    for (int p = 0; p < n1; ++p) {
        for (int j = 0; j < nv; ++j) psi_ids[j] = s.psi[p][j].value;
        std::vector<int> cpsi = spectral_dv_ids(tape, psi_ids, grid);
        std::vector<int> q = q_psi_ids(tape, psi_ids, sigma, ctx);
        for (int j = 0; j < nv; ++j) {
            const double v = grid.nodes[j];
            int dv = tape.sub(cpsi[j], tape.scale(psi_ids[j], 2.0 * v));
            int r = tape.sum({tape.scale(s.psi[p][j].dt, eps), tape.scale(s.psi[p][j].dx, v),
                              tape.mul(s.phi_x[p], dv), tape.scale(q[j], -1.0 / eps)});
            ge_res.push_back(r);
        }
    }
    int ge = mean_of_squares(tape, ge_res);

    const int nbt = (int)colloc.t_boundary.size();
    std::vector<int> bc_res;
    auto bc_end = [&](const std::vector<std::vector<FieldSample>>& psi_bc, const std::vector<double>& f_bc,
                      bool left) {
        for (int i = 0; i < nbt; ++i)
            for (int j = 0; j < nv; ++j) {
                const double v = grid.nodes[j];
                if ((left && v <= 0.0) || (!left && v >= 0.0)) continue;
                int f = tape.scale(psi_bc[i][j].value, maxwellian(v));
                bc_res.push_back(tape.add_const(f, -f_bc[j]));
            }
    };
    bc_end(s.psi_bc_left, s.f_bc_left, true);
    bc_end(s.psi_bc_right, s.f_bc_right, false);
    int bc = mean_of_squares(tape, bc_res);

    const int nic = (int)colloc.x_initial.size();
    std::vector<int> ic_res;
    ic_res.reserve((size_t)nic * nv);
    for (int k = 0; k < nic; ++k)
        for (int j = 0; j < nv; ++j) {
            int f = tape.scale(s.psi_ic[k][j].value, maxwellian(grid.nodes[j]));
            ic_res.push_back(tape.add_const(f, -s.f_ic[k][j]));
        }
    int ic = mean_of_squares(tape, ic_res);

    LossBreakdown out;
    out.weights = w;
    out.ge_micro = tape.val(ge);
    out.bc = tape.val(bc);
    out.ic = tape.val(ic);
    out.id_total = tape.lin({ge, bc, ic}, {1.0, w.lambda1, w.lambda2});
    out.total = tape.val(out.id_total);
    return out;
}

DataLossIds data_loss_apnn(Tape& tape, const std::vector<FieldSample>& rho_pred,
                           const std::vector<double>& rho_obs,
                           const std::vector<GHeadSample>& g_pred, const std::vector<int>& g_node,
                           const std::vector<double>& g_obs, const VelocityGrid& grid,
                           const LossWeights& w, bool partial) {
    if (rho_pred.empty() || rho_pred.size() != rho_obs.size())
        throw std::invalid_argument("data_loss_apnn: empty or mismatched rho dataset");
    std::vector<int> rres(rho_pred.size());
    for (size_t k = 0; k < rho_pred.size(); ++k)
        rres[k] = tape.add_const(rho_pred[k].value, -rho_obs[k]);
    int rho_term = tape.scale(mean_of_squares(tape, rres), w.w_rho);

    DataLossIds out;
    out.rho_part = tape.val(rho_term);
    if (partial) {
        out.total = rho_term;
        return out;
    }
    if (g_pred.empty() || g_pred.size() != g_obs.size() || g_pred.size() != g_node.size())
        throw std::invalid_argument("data_loss_apnn: empty or mismatched g dataset");
    std::vector<int> gres(g_pred.size());
    for (size_t k = 0; k < g_pred.size(); ++k) {
        int j = g_node[k];
        int g_val = tape.scale(g_pred[k].psi[j].value, maxwellian(grid.nodes[j]));
        gres[k] = tape.add_const(g_val, -g_obs[k]);
    }
    int g_term = tape.scale(mean_of_squares(tape, gres), w.w_g);
    out.g_part = tape.val(g_term);
    out.total = tape.add(rho_term, g_term);
    return out;
}

int data_loss_pinn(Tape& tape, const std::vector<FieldSample>& psi_pred, const std::vector<int>& f_node,
                   const std::vector<double>& f_obs, const VelocityGrid& grid, const LossWeights& w) {
    if (psi_pred.empty() || psi_pred.size() != f_obs.size() || psi_pred.size() != f_node.size())
        throw std::invalid_argument("data_loss_pinn: empty or mismatched dataset");
    std::vector<int> res(psi_pred.size());
    for (size_t k = 0; k < psi_pred.size(); ++k) {
        int f = tape.scale(psi_pred[k].value, maxwellian(grid.nodes[f_node[k]]));
        res[k] = tape.add_const(f, -f_obs[k]);
    }
    return tape.scale(mean_of_squares(tape, res), w.w_f);
}

int data_loss_phi(Tape& tape, const std::vector<int>& phi_pred, const std::vector<double>& phi_obs,
                  const LossWeights& w) {
    if (phi_pred.empty() || phi_pred.size() != phi_obs.size())
        throw std::invalid_argument("data_loss_phi: empty or mismatched dataset");
    std::vector<int> res(phi_pred.size());
    for (size_t k = 0; k < phi_pred.size(); ++k) res[k] = tape.add_const(phi_pred[k], -phi_obs[k]);
    return tape.scale(mean_of_squares(tape, res), w.w_phi);
}

}  // namespace semikin
