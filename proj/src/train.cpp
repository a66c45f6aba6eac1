#include "semikin/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <stdexcept>

namespace semikin {

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, (double)state.t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, (double)state.t);
    for (size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        if (!std::isfinite(g))
            throw std::runtime_error("adam_step: non-finite gradient at update " + std::to_string(state.t));
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps_adam);
    }
}

double relative_l2_error(const std::vector<double>& pred, const std::vector<double>& ref) {
    if (pred.size() != ref.size()) throw std::invalid_argument("relative_l2_error: size mismatch");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < ref.size(); ++i) {
        num += (pred[i] - ref[i]) * (pred[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    if (den == 0.0) throw std::invalid_argument("relative_l2_error: zero reference norm");
    return std::sqrt(num / den);
}

double relative_l2_error(const Trajectory& pred, const Trajectory& ref, double t) {
    auto snap_at = [&](const Trajectory& tr) -> const std::vector<double>& {
        int best = 0;
        for (int s = 1; s < tr.n_snapshots(); ++s)
            if (std::abs(tr.times[s] - t) < std::abs(tr.times[best] - t)) best = s;
        return tr.rho[best].values;
    };
    return relative_l2_error(snap_at(pred), snap_at(ref));
}

namespace {

// One trainable network bound to a fixed input batch; tape leaves are created
// contiguously per column so (col, slot) maps to a leaf id arithmetically.
struct NetPack {
    Mlp net;
    std::vector<int> tdims;
    Eigen::MatrixXd X;
    MlpTrace trace;
    ParamGrad grad;
    AdamState adam;
    std::vector<double> params, gvec;
    Eigen::MatrixXd val_bar;
    std::vector<Eigen::MatrixXd> tan_bar;
    int leaf0 = -1;
    int n_slots = 0;

    void init(Mlp n, std::vector<int> dims) {
        net = std::move(n);
        tdims = std::move(dims);
        n_slots = 1 + (int)tdims.size();
        grad.init(net);
        net.get_params(params);
        adam.init(params.size());
    }
    int cols() const { return (int)X.cols(); }
    void eval() { trace.forward(net, X, tdims); }
    double out_value(int col) const { return trace.value()(0, col); }
    void make_leaves(Tape& tape) {
        leaf0 = -1;
        for (int c = 0; c < cols(); ++c) {
            int v = tape.leaf(trace.value()(0, c));
            if (c == 0) leaf0 = v;
            for (size_t d = 0; d < tdims.size(); ++d) tape.leaf(trace.tangent((int)d)(0, c));
        }
    }
    int leaf(int col, int slot) const { return leaf0 + col * n_slots + slot; }
    // slots: 0 = value, then tangents in tdims order
    FieldSample sample(int col) const {
        FieldSample s;
        s.value = leaf(col, 0);
        if (n_slots >= 3) {
            s.dt = leaf(col, 1);
            s.dx = leaf(col, 2);
        } else if (n_slots == 2) {
            s.dx = leaf(col, 1);
        }
        return s;
    }
    void accumulate_grad(const std::vector<double>& bar) {
        val_bar.resize(1, cols());
        tan_bar.resize(tdims.size());
        for (size_t d = 0; d < tdims.size(); ++d) tan_bar[d].resize(1, cols());
        for (int c = 0; c < cols(); ++c) {
            val_bar(0, c) = bar[leaf(c, 0)];
            for (size_t d = 0; d < tdims.size(); ++d) tan_bar[d](0, c) = bar[leaf(c, 1 + (int)d)];
        }
        grad.zero();
        trace.backward(val_bar, tan_bar, grad);
        grad.flatten(gvec);
    }
    void update(const TrainConfig& cfg) {
        adam_step(params, gvec, adam, cfg);
        net.set_params(params);
    }
};

struct Trainer {
    const Problem& prob;
    const TrainConfig& cfg;
    const Trajectory& reference;
    const Observations* data = nullptr;

    const VelocityGrid& grid;
    int nv;
    int n1, nbt, nic;
    std::vector<double> pts_t, pts_x;   // interior point coordinates (size n1)

    NetPack rho_net, g_net, f_net, phi_net;
    bool apnn;
    bool bp;
    bool inverse;
    bool partial;
    double sigma_val = 0.0;
    AdamState sigma_adam;
    bool sigma_warned = false;

    // observation subsets (indices into data->g / data->f)
    std::vector<int> kinetic_train_idx, kinetic_val_idx;

    Tape tape;
    std::vector<double> bar;

    Trainer(const Problem& p, const TrainConfig& c, const Trajectory& ref, const Observations* d)
        : prob(p), cfg(c), reference(ref), data(d), grid(p.grid), nv(p.grid.n_nodes) {
        apnn = cfg.method == Method::Apnn;
        bp = prob.has_phi_net();
        inverse = cfg.inverse != InverseMode::None;
        partial = cfg.inverse == InverseMode::Partial;
        if (inverse && !data) throw std::invalid_argument("train_inverse: observations required");
        if (inverse) sigma_val = cfg.sigma0;

        const CollocationSet& col = prob.colloc;
        n1 = col.n1();
        nbt = (int)col.t_boundary.size();
        nic = (int)col.x_initial.size();
        pts_t.reserve(n1);
        pts_x.reserve(n1);
        for (double t : col.t_interior)
            for (double x : col.x_interior) {
                pts_t.push_back(t);
                pts_x.push_back(x);
            }
        if (inverse) {
            split_validation();
            sigma_adam.init(1);
        }
        build_nets();
        build_batches();
    }

    void split_validation() {
        const size_t n = apnn ? data->g.size() : data->f.size();
        std::vector<int> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = (int)i;
        std::mt19937_64 gen(cfg.seed + 100);
        for (size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[gen() % i]);
        const size_t n_val = partial ? 0 : (size_t)std::lround(cfg.validation_fraction * (double)n);
        kinetic_val_idx.assign(idx.begin(), idx.begin() + n_val);
        kinetic_train_idx.assign(idx.begin() + n_val, idx.end());
        std::sort(kinetic_val_idx.begin(), kinetic_val_idx.end());
        std::sort(kinetic_train_idx.begin(), kinetic_train_idx.end());
    }

    std::vector<int> widths(int in, int layers, int width) const {
        std::vector<int> w{in};
        for (int l = 0; l < layers; ++l) w.push_back(width);
        w.push_back(1);
        return w;
    }

    void build_nets() {
        if (apnn) {
            rho_net.init(xavier_init(widths(2, cfg.hidden_layers, cfg.hidden_width), cfg.seed), {0, 1});
            g_net.init(xavier_init(widths(3, cfg.hidden_layers, cfg.hidden_width), cfg.seed + 1), {0, 1});
        } else {
            f_net.init(xavier_init(widths(3, cfg.hidden_layers, cfg.hidden_width), cfg.seed), {0, 1});
        }
        if (bp)
            phi_net.init(xavier_init(widths(2, cfg.phi_hidden_layers, cfg.phi_hidden_width), cfg.seed + 2),
                         {1});
    }

    // column layout bookkeeping
    int rho_bcL0 = 0, rho_bcR0 = 0, rho_ic0 = 0, rho_data0 = 0;
    int kin_bcL0 = 0, kin_bcR0 = 0, kin_ic0 = 0, kin_data0 = 0;
    int phi_int0 = 0, phi_stm0 = 0, phi_stp0 = 0, phi_bc0 = 0, phi_data0 = 0;

    void build_batches() {
        const CollocationSet& col = prob.colloc;
        const double t0 = 0.0;

        if (apnn) {
            int ndr = inverse ? (int)data->rho.size() : 0;
            int cols = n1 + 2 * nbt + nic + ndr;
            rho_net.X.resize(2, cols);
            int c = 0;
            for (int p = 0; p < n1; ++p) rho_net.X.col(c++) << pts_t[p], pts_x[p];
            rho_bcL0 = c;
            for (double t : col.t_boundary) rho_net.X.col(c++) << t, col.x_left;
            rho_bcR0 = c;
            for (double t : col.t_boundary) rho_net.X.col(c++) << t, col.x_right;
            rho_ic0 = c;
            for (double x : col.x_initial) rho_net.X.col(c++) << t0, x;
            rho_data0 = c;
            if (inverse)
                for (const auto& s : data->rho) rho_net.X.col(c++) << s.t, s.x;
        }

        {
            NetPack& kin = apnn ? g_net : f_net;
            int ndk = 0;
            if (inverse) ndk = apnn ? (int)data->g.size() * nv : (int)data->f.size();
            int cols = (n1 + 2 * nbt + nic) * nv + ndk;
            kin.X.resize(3, cols);
            int c = 0;
            for (int p = 0; p < n1; ++p)
                for (int j = 0; j < nv; ++j) kin.X.col(c++) << pts_t[p], pts_x[p], grid.nodes[j];
            kin_bcL0 = c;
            for (double t : col.t_boundary)
                for (int j = 0; j < nv; ++j) kin.X.col(c++) << t, col.x_left, grid.nodes[j];
            kin_bcR0 = c;
            for (double t : col.t_boundary)
                for (int j = 0; j < nv; ++j) kin.X.col(c++) << t, col.x_right, grid.nodes[j];
            kin_ic0 = c;
            for (double x : col.x_initial)
                for (int j = 0; j < nv; ++j) kin.X.col(c++) << t0, x, grid.nodes[j];
            kin_data0 = c;
            if (inverse) {
                if (apnn) {
                    for (const auto& s : data->g)
                        for (int j = 0; j < nv; ++j) kin.X.col(c++) << s.t, s.x, grid.nodes[j];
                } else {
                    for (const auto& s : data->f) kin.X.col(c++) << s.t, s.x, grid.nodes[s.node];
                }
            }
        }

        if (bp) {
            int ndp = inverse ? (int)data->phi.size() : 0;
            int cols = 3 * n1 + 2 * nbt + ndp;
            phi_net.X.resize(2, cols);
            int c = 0;
            phi_int0 = c;
            for (int p = 0; p < n1; ++p) phi_net.X.col(c++) << pts_t[p], pts_x[p];
            phi_stm0 = c;
            for (int p = 0; p < n1; ++p) phi_net.X.col(c++) << pts_t[p], pts_x[p] - prob.cfg.dx;
            phi_stp0 = c;
            for (int p = 0; p < n1; ++p) phi_net.X.col(c++) << pts_t[p], pts_x[p] + prob.cfg.dx;
            phi_bc0 = c;
            for (double t : col.t_boundary) {
                phi_net.X.col(c++) << t, col.x_left;
                phi_net.X.col(c++) << t, col.x_right;
            }
            phi_data0 = c;
            if (inverse)
                for (const auto& s : data->phi) phi_net.X.col(c++) << s.t, s.x;
        }
    }

    // --- per-epoch assembly -------------------------------------------------

    std::vector<int> interior_phi_x_ids() {
        std::vector<int> ids(n1);
        if (bp) {
            for (int p = 0; p < n1; ++p) ids[p] = phi_net.leaf(phi_int0 + p, 1);
        } else {
            // the given potential is static: cache one constant per x point
            const int nxc = (int)prob.colloc.x_interior.size();
            std::vector<int> per_x(nxc);
            for (int k = 0; k < nxc; ++k) per_x[k] = tape.constant(prob.phi_x(prob.colloc.x_interior[k]));
            for (int p = 0; p < n1; ++p) ids[p] = per_x[p % nxc];
        }
        return ids;
    }

    GHeadSample kin_head(int col0) {
        std::vector<FieldSample> raw(nv);
        NetPack& kin = apnn ? g_net : f_net;
        for (int j = 0; j < nv; ++j) raw[j] = kin.sample(col0 + j);
        return g_head(tape, raw, grid);
    }

    LossBreakdown assemble(SigmaRef sigma) {
        LossBreakdown out;
        const CollocationSet& col = prob.colloc;
        std::vector<int> parts;
        std::vector<double> part_w;

        if (apnn) {
            ApnnSamples s;
            s.rho.reserve(n1);
            s.g.reserve(n1);
            for (int p = 0; p < n1; ++p) s.rho.push_back(rho_head(tape, rho_net.sample(p)));
            for (int p = 0; p < n1; ++p) s.g.push_back(kin_head(p * nv));
            s.phi_x = interior_phi_x_ids();
            for (int i = 0; i < nbt; ++i) {
                s.rho_bc_left.push_back(rho_head(tape, rho_net.sample(rho_bcL0 + i)));
                s.rho_bc_right.push_back(rho_head(tape, rho_net.sample(rho_bcR0 + i)));
                s.g_bc_left.push_back(kin_head(kin_bcL0 + i * nv));
                s.g_bc_right.push_back(kin_head(kin_bcR0 + i * nv));
            }
            s.f_bc_left = prob.f_bc_left;
            s.f_bc_right = prob.f_bc_right;
            for (int k = 0; k < nic; ++k) {
                s.rho_ic.push_back(rho_head(tape, rho_net.sample(rho_ic0 + k)));
                s.g_ic.push_back(kin_head(kin_ic0 + k * nv));
                s.f_ic.push_back(prob.f_ic_nodes);
            }
            out = apnn_loss(tape, s, prob.cfg.eps, sigma, prob.ctx, col, cfg.weights);
            parts.push_back(out.id_total);
            part_w.push_back(1.0);

            if (inverse) {
                std::vector<FieldSample> rho_pred(data->rho.size());
                std::vector<double> rho_obs(data->rho.size());
                for (size_t k = 0; k < data->rho.size(); ++k) {
                    rho_pred[k] = rho_head(tape, rho_net.sample(rho_data0 + (int)k));
                    rho_obs[k] = data->rho[k].rho;
                }
                std::vector<GHeadSample> g_pred;
                std::vector<int> g_node;
                std::vector<double> g_obs;
                for (int idx : kinetic_train_idx) {
                    g_pred.push_back(kin_head(kin_data0 + idx * nv));
                    g_node.push_back(data->g[idx].node);
                    g_obs.push_back(data->g[idx].g);
                }
                DataLossIds d = data_loss_apnn(tape, rho_pred, rho_obs, g_pred, g_node, g_obs, grid,
                                               cfg.weights, partial);
                out.data_rho = d.rho_part;
                out.data_g = d.g_part;
                parts.push_back(d.total);
                part_w.push_back(1.0);
            }
        } else {
            PinnSamples s;
            s.psi.reserve(n1);
            auto node_row = [&](int col0) {
                std::vector<FieldSample> row(nv);
                for (int j = 0; j < nv; ++j) row[j] = f_net.sample(col0 + j);
                return row;
            };
            for (int p = 0; p < n1; ++p) s.psi.push_back(node_row(p * nv));
            s.phi_x = interior_phi_x_ids();
            for (int i = 0; i < nbt; ++i) {
                s.psi_bc_left.push_back(node_row(kin_bcL0 + i * nv));
                s.psi_bc_right.push_back(node_row(kin_bcR0 + i * nv));
            }
            s.f_bc_left = prob.f_bc_left;
            s.f_bc_right = prob.f_bc_right;
            for (int k = 0; k < nic; ++k) {
                s.psi_ic.push_back(node_row(kin_ic0 + k * nv));
                s.f_ic.push_back(prob.f_ic_nodes);
            }
            out = pinn_loss(tape, s, prob.cfg.eps, sigma, prob.ctx, col, cfg.weights);
            parts.push_back(out.id_total);
            part_w.push_back(1.0);

            if (inverse) {
                std::vector<FieldSample> f_pred;
                std::vector<int> f_node;
                std::vector<double> f_obs;
                for (size_t k = 0; k < kinetic_train_idx.size(); ++k) {
                    int idx = kinetic_train_idx[k];
                    // columns follow kinetic_train order? no: columns follow data order
                    f_pred.push_back(f_net.sample(kin_data0 + idx));
                    f_node.push_back(data->f[idx].node);
                    f_obs.push_back(data->f[idx].f);
                }
                int d = data_loss_pinn(tape, f_pred, f_node, f_obs, grid, cfg.weights);
                out.data_f = tape.val(d);
                parts.push_back(d);
                part_w.push_back(1.0);
            }
        }

        if (bp) {
            // Poisson residual beta (phi(x-h) - 2 phi + phi(x+h))/h^2 - (rho - c)
            const double h = prob.cfg.dx;
            const double bh2 = prob.cfg.beta / (h * h);
            std::vector<int> pres(n1);
            for (int p = 0; p < n1; ++p) {
                int phim = phi_net.leaf(phi_stm0 + p, 0);
                int phi0 = phi_net.leaf(phi_int0 + p, 0);
                int phip = phi_net.leaf(phi_stp0 + p, 0);
                int rho_id;
                if (apnn) {
                    rho_id = tape.exp_(tape.neg(rho_net.leaf(p, 0)));
                } else {
                    std::vector<int> psis(nv);
                    for (int j = 0; j < nv; ++j) psis[j] = f_net.leaf(p * nv + j, 0);
                    rho_id = tape.lin(psis, grid.weights);
                }
                int lhs = tape.lin({phim, phi0, phip, rho_id}, {bh2, -2.0 * bh2, bh2, -1.0});
                pres[p] = tape.add_const(lhs, prob.doping(pts_x[p]));
            }
            std::vector<int> sq(n1);
            for (int p = 0; p < n1; ++p) sq[p] = tape.square(pres[p]);
            int pois = tape.scale(tape.sum(sq), 1.0 / n1);

            // Dirichlet data phi(t,0) = 0, phi(t,1) = V
            std::vector<int> bres;
            for (int i = 0; i < nbt; ++i) {
                bres.push_back(tape.square(phi_net.leaf(phi_bc0 + 2 * i, 0)));
                bres.push_back(
                    tape.square(tape.add_const(phi_net.leaf(phi_bc0 + 2 * i + 1, 0), -prob.cfg.voltage)));
            }
            int pbc = tape.scale(tape.sum(bres), 1.0 / (double)bres.size());
            int pterm = tape.add(pois, pbc);
            out.poisson = tape.val(pterm);
            parts.push_back(pterm);
            part_w.push_back(cfg.weights.w_poisson);

            if (inverse && !data->phi.empty()) {
                std::vector<int> phi_pred(data->phi.size());
                std::vector<double> phi_obs(data->phi.size());
                for (size_t k = 0; k < data->phi.size(); ++k) {
                    phi_pred[k] = phi_net.leaf(phi_data0 + (int)k, 0);
                    phi_obs[k] = data->phi[k].phi;
                }
                int d = data_loss_phi(tape, phi_pred, phi_obs, cfg.weights);
                out.data_phi = tape.val(d);
                parts.push_back(d);
                part_w.push_back(1.0);
            }
        }

        out.id_total = tape.lin(parts, part_w);
        out.total = tape.val(out.id_total);
        return out;
    }

    double validation_loss() {
        if (!inverse || kinetic_val_idx.empty()) return 0.0;
        // plain arithmetic on the batch outputs; no gradient flow
        double s = 0.0;
        if (apnn) {
            for (int idx : kinetic_val_idx) {
                double mean = 0.0;
                for (int j = 0; j < nv; ++j)
                    mean += g_net.out_value(kin_data0 + idx * nv + j) * grid.weights[j];
                int j = data->g[idx].node;
                double psi = g_net.out_value(kin_data0 + idx * nv + j) - mean;
                double diff = psi * maxwellian(grid.nodes[j]) - data->g[idx].g;
                s += diff * diff;
            }
        } else {
            for (int idx : kinetic_val_idx) {
                double f = f_net.out_value(kin_data0 + idx) * maxwellian(grid.nodes[data->f[idx].node]);
                double diff = f - data->f[idx].f;
                s += diff * diff;
            }
        }
        return s / (double)kinetic_val_idx.size();
    }

    void final_fields(TrainReport& rep) {
        const int nx = (int)reference.rho.back().values.size();
        const double t_end = reference.times.back();
        Eigen::MatrixXd X(apnn || bp ? 2 : 3, 1);
        rep.rho_final.resize(nx);
        if (apnn) {
            Eigen::MatrixXd Xr(2, nx);
            for (int i = 0; i < nx; ++i) Xr.col(i) << t_end, reference.x(i);
            BatchOutput o = batch_eval(rho_net.net, Xr, {});
            for (int i = 0; i < nx; ++i) rep.rho_final[i] = std::exp(-o.value(0, i));
        } else {
            Eigen::MatrixXd Xf(3, nx * nv);
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < nv; ++j) Xf.col(i * nv + j) << t_end, reference.x(i), grid.nodes[j];
            BatchOutput o = batch_eval(f_net.net, Xf, {});
            for (int i = 0; i < nx; ++i) {
                double r = 0.0;
                for (int j = 0; j < nv; ++j) r += o.value(0, i * nv + j) * grid.weights[j];
                rep.rho_final[i] = r;
            }
        }
        rep.final_error = relative_l2_error(rep.rho_final, reference.rho.back().values);
        if (bp) {
            Eigen::MatrixXd Xp(2, nx);
            for (int i = 0; i < nx; ++i) Xp.col(i) << t_end, reference.x(i);
            BatchOutput o = batch_eval(phi_net.net, Xp, {});
            rep.phi_final.resize(nx);
            for (int i = 0; i < nx; ++i) rep.phi_final[i] = o.value(0, i);
            rep.final_error_phi = relative_l2_error(rep.phi_final, reference.phi.back().values);
        }
    }

    TrainReport run() {
        auto t_start = std::chrono::steady_clock::now();
        TrainReport rep;
        rep.seed = cfg.seed;
        rep.epochs = cfg.epochs;
        rep.history.reserve(cfg.epochs);
        double initial_total = 0.0;

        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            if (apnn) {
                rho_net.eval();
                g_net.eval();
            } else {
                f_net.eval();
            }
            if (bp) phi_net.eval();

            tape.clear();
            if (apnn) {
                rho_net.make_leaves(tape);
                g_net.make_leaves(tape);
            } else {
                f_net.make_leaves(tape);
            }
            if (bp) phi_net.make_leaves(tape);

            SigmaRef sigma;
            if (inverse) sigma.leaf = tape.leaf(sigma_val);

            LossBreakdown lb = assemble(sigma);
            // the PINN risk at small eps starts at O(1/eps^2) by construction,
            // so the divergence guard is relative to the initial loss
            if (epoch == 0) initial_total = lb.total;
            const double cap = cfg.divergence_abort * std::max(1.0, initial_total);
            if (!std::isfinite(lb.total) || lb.total > cap)
                throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch) +
                                         " (total = " + std::to_string(lb.total) + ")");

            tape.gradient(lb.id_total, bar);
            if (apnn) {
                rho_net.accumulate_grad(bar);
                g_net.accumulate_grad(bar);
                rho_net.update(cfg);
                g_net.update(cfg);
            } else {
                f_net.accumulate_grad(bar);
                f_net.update(cfg);
            }
            if (bp) {
                phi_net.accumulate_grad(bar);
                phi_net.update(cfg);
            }
            if (inverse) {
                std::vector<double> sp{sigma_val}, sg{bar[sigma.leaf]};
                adam_step(sp, sg, sigma_adam, cfg);
                sigma_val = sp[0];
                if (sigma_val <= 0.0) {
                    sigma_val = 1e-6;
                    if (!sigma_warned) {
                        std::cerr << "train: sigma clamped to 1e-6 at epoch " << epoch << "\n";
                        sigma_warned = true;
                    }
                }
                rep.sigma_history.push_back(sigma_val);
            }

            HistoryRow row;
            row.total = lb.total;
            row.ge_macro = lb.ge_macro;
            row.ge_micro = lb.ge_micro;
            row.bc = lb.bc;
            row.ic = lb.ic;
            row.data = lb.data_rho + lb.data_g + lb.data_f + lb.data_phi;
            row.poisson = lb.poisson;
            rep.history.push_back(row);
        }

        if (inverse) {
            rep.sigma_hat = sigma_val;
            // one more forward pass so validation sees the final parameters
            if (apnn)
                g_net.eval();
            else
                f_net.eval();
            rep.val_data_loss = validation_loss();
        }
        final_fields(rep);
        rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        return rep;
    }
};

}  // namespace

TrainReport train_forward(const Problem& prob, const TrainConfig& cfg, const Trajectory& reference) {
    TrainConfig c = cfg;
    c.inverse = InverseMode::None;
    Trainer tr(prob, c, reference, nullptr);
    return tr.run();
}

TrainReport train_inverse(const Problem& prob, const TrainConfig& cfg, const Observations& data,
                          const Trajectory& reference) {
    if (cfg.inverse == InverseMode::None)
        throw std::invalid_argument("train_inverse: inverse mode must be full or partial");
    Trainer tr(prob, cfg, reference, &data);
    return tr.run();
}

namespace {
void put17(std::ofstream& f, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    f << buf;
}
}  // namespace

void write_loss_history_csv(const TrainReport& report, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_loss_history_csv: cannot open " + path);
    f << "epoch,total,ge_macro,ge_micro,bc,ic,data\n";
    for (size_t e = 0; e < report.history.size(); ++e) {
        const HistoryRow& r = report.history[e];
        f << e << ",";
        put17(f, r.total);
        f << ",";
        put17(f, r.ge_macro);
        f << ",";
        put17(f, r.ge_micro);
        f << ",";
        put17(f, r.bc);
        f << ",";
        put17(f, r.ic);
        f << ",";
        put17(f, r.data);
        f << "\n";
    }
}

void write_sigma_history_csv(const TrainReport& report, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_sigma_history_csv: cannot open " + path);
    f << "epoch,sigma\n";
    for (size_t e = 0; e < report.sigma_history.size(); ++e) {
        f << e << ",";
        put17(f, report.sigma_history[e]);
        f << "\n";
    }
}

void write_metrics(const TrainReport& report, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_metrics: cannot open " + path);
    f << "epochs = " << report.epochs << "\n";
    f << "seed = " << report.seed << "\n";
    f << "final_error = ";
    put17(f, report.final_error);
    f << "\nfinal_error_phi = ";
    put17(f, report.final_error_phi);
    f << "\nsigma_hat = ";
    put17(f, report.sigma_hat);
    f << "\nval_data_loss = ";
    put17(f, report.val_data_loss);
    f << "\nfinal_total_loss = ";
    put17(f, report.history.empty() ? 0.0 : report.history.back().total);
    f << "\n";
}

}  // namespace semikin
