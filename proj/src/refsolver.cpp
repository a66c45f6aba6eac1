#include "semikin/refsolver.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace semikin {

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

void format17(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

PotentialField solve_poisson(const MacroField& rho, const SolverConfig& cfg) {
    const int n = rho.n();
    if (!(cfg.beta > 0.0)) throw std::invalid_argument("solve_poisson: beta must be positive");
    if ((int)cfg.doping.size() != n) throw std::invalid_argument("solve_poisson: doping size mismatch");
    if (!all_finite(rho.values)) throw std::runtime_error("solve_poisson: non-finite density input");

    // Thomas solve of beta (phi_{i-1} - 2 phi_i + phi_{i+1}) / dx^2 = rho_i - c_i.
    const double h2 = rho.dx * rho.dx;
    std::vector<double> phi(n, 0.0), cp(n, 0.0), dp(n, 0.0);
    phi[0] = 0.0;
    phi[n - 1] = cfg.voltage;
    const int m = n - 2;
    if (m > 0) {
        double b = -2.0;
        cp[1] = 1.0 / b;
        dp[1] = (h2 / cfg.beta * (rho.values[1] - cfg.doping[1]) - phi[0]) / b;
        for (int i = 2; i <= m; ++i) {
            double rhs = h2 / cfg.beta * (rho.values[i] - cfg.doping[i]);
            if (i == m) rhs -= phi[n - 1];
            double denom = b - cp[i - 1];
            cp[i] = 1.0 / denom;
            dp[i] = (rhs - dp[i - 1]) / denom;
        }
        phi[m] = dp[m];
        for (int i = m - 1; i >= 1; --i) phi[i] = dp[i] - cp[i] * phi[i + 1];
    }
    return make_potential(std::move(phi), rho.dx);
}

namespace {

struct BcData {
    std::vector<double> psi_left;    // F_L(v_j)/M(v_j)
    std::vector<double> psi_right;
    double rho_left = 1.0;
    double rho_right = 1.0;
};

BcData make_bc(const SolverConfig& cfg, const VelocityGrid& grid) {
    BcData bc;
    const int nv = grid.n_nodes;
    if ((int)cfg.inflow_left.size() != nv || (int)cfg.inflow_right.size() != nv)
        throw std::invalid_argument("refsolver: inflow node vectors must match the velocity grid");
    bc.psi_left.resize(nv);
    bc.psi_right.resize(nv);
    double rl = 0.0, rr = 0.0;
    for (int j = 0; j < nv; ++j) {
        double mj = maxwellian(grid.nodes[j]);
        bc.psi_left[j] = cfg.inflow_left[j] / mj;
        bc.psi_right[j] = cfg.inflow_right[j] / mj;
        rl += bc.psi_left[j] * grid.weights[j];
        rr += bc.psi_right[j] * grid.weights[j];
    }
    bc.rho_left = rl;
    bc.rho_right = rr;
    return bc;
}

// Ghost half-columns at x_{-1/2} and x_{Nx+1/2} for inflow runs: f = F on
// incoming nodes, first-order extrapolation of the adjacent half-point on
// outgoing ones.
void ghost_columns(const KineticState& s, const BcData& bc, const VelocityGrid& grid, double eps,
                   std::vector<double>& gl, std::vector<double>& gr) {
    const int nh = s.psi.n_x;
    const int nv = s.psi.n_v;
    gl.resize(nv);
    gr.resize(nv);
    for (int j = 0; j < nv; ++j) {
        if (grid.nodes[j] > 0.0)
            gl[j] = (bc.psi_left[j] - bc.rho_left) / eps;
        else
            gl[j] = s.psi.at(0, j);
        if (grid.nodes[j] < 0.0)
            gr[j] = (bc.psi_right[j] - bc.rho_right) / eps;
        else
            gr[j] = s.psi.at(nh - 1, j);
    }
}

}  // namespace

MicroField psi_at_nodes(const KineticState& state) {
    const int nh = state.psi.n_x;
    const int nv = state.psi.n_v;
    MicroField out = MicroField::zeros(nh + 1, nv);
    for (int j = 0; j < nv; ++j) {
        out.at(0, j) = state.psi.at(0, j);
        out.at(nh, j) = state.psi.at(nh - 1, j);
        for (int i = 1; i < nh; ++i) out.at(i, j) = 0.5 * (state.psi.at(i - 1, j) + state.psi.at(i, j));
    }
    return out;
}

KineticState init_state(const SolverConfig& cfg, const CollisionContext& ctx) {
    const int nx = cfg.n_x();
    const int nv = ctx.grid.n_nodes;
    if (nx < 3) throw std::invalid_argument("init_state: grid too small");
    const int nh = nx - 1;

    KineticState s;
    s.dt = cfg.dt;
    s.rho.values = cfg.rho_ic;
    s.rho.dx = cfg.dx;
    s.psi = MicroField::zeros(nh, nv);
    if (!cfg.psi_ic.empty()) {
        if ((int)cfg.psi_ic.size() != nx * nv)
            throw std::invalid_argument("init_state: psi_ic must be given at the nodes");
        for (int i = 0; i < nh; ++i)
            for (int j = 0; j < nv; ++j)
                s.psi.at(i, j) = 0.5 * (cfg.psi_ic[i * nv + j] + cfg.psi_ic[(i + 1) * nv + j]);
    }
    if (cfg.poisson_enabled) {
        s.phi = solve_poisson(s.rho, cfg);
    } else if (!cfg.phi_fixed.empty()) {
        if ((int)cfg.phi_fixed.size() != nx)
            throw std::invalid_argument("init_state: phi_fixed size mismatch");
        s.phi = make_potential(cfg.phi_fixed, cfg.dx);
    } else {
        s.phi = make_potential(std::vector<double>(nx, 0.0), cfg.dx);
    }

    // zero-mean constraint on every half-column
    for (int i = 0; i < nh; ++i) {
        double m = 0.0;
        for (int j = 0; j < nv; ++j) m += s.psi.at(i, j) * ctx.grid.weights[j];
        for (int j = 0; j < nv; ++j) s.psi.at(i, j) -= m;
    }
    if (cfg.bc == BcKind::Inflow) {
        BcData bc = make_bc(cfg, ctx.grid);
        s.rho.values[0] = bc.rho_left;
        s.rho.values[nx - 1] = bc.rho_right;
    } else {
        s.rho.values[nx - 1] = s.rho.values[0];
    }
    return s;
}

KineticState step(const KineticState& state, const SolverConfig& cfg, const CollisionContext& ctx) {
    const VelocityGrid& grid = ctx.grid;
    const int nx = (int)state.rho.values.size();
    const int nh = state.psi.n_x;
    const int nv = state.psi.n_v;
    const double dx = cfg.dx;
    const double dt = cfg.dt;
    const double eps = cfg.eps;
    const bool periodic = cfg.bc == BcKind::Periodic;
    const int np = nx - 1;   // periodic: distinct nodes 0..np-1, node np mirrors 0

    KineticState next = state;
    if (cfg.poisson_enabled) next.phi = solve_poisson(state.rho, cfg);
    const PotentialField& phi = next.phi;

    // Implicit collision matrix for tabulated kernels: (eps^2 I + dt L),
    // L = diag(lambda) - A, A_{jk} = sigma(v_j, v_k) w_k.
    const bool const_kernel = ctx.kernel.kind == ScatteringKernel::Kind::Constant;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    if (!const_kernel) {
        Eigen::MatrixXd Lmat = Eigen::MatrixXd::Zero(nv, nv);
        for (int j = 0; j < nv; ++j) {
            Lmat(j, j) = eps * eps + dt * ctx.lambda_nodes[j];
            for (int k = 0; k < nv; ++k) Lmat(j, k) -= dt * ctx.kernel.sigma(j, k, nv) * grid.weights[k];
        }
        lu.compute(Lmat);
    }

    std::vector<double> gl, gr;
    BcData bc;
    if (!periodic) {
        bc = make_bc(cfg, grid);
        ghost_columns(state, bc, grid, eps, gl, gr);
    }
    // half-column neighbor access with ghosts / wrap
    auto psi_at = [&](int i, int j) -> double {
        if (periodic) return state.psi.at((i % nh + nh) % nh, j);
        if (i < 0) return gl[j];
        if (i >= nh) return gr[j];
        return state.psi.at(i, j);
    };

    // (ii) micro update at the half-points
    std::vector<double> row(nv), trans(nv), rhs(nv);
    for (int i = 0; i < nh; ++i) {
        const int inode = i, ipnode = periodic ? (i + 1) % np : i + 1;
        const double drho = (state.rho.values[ipnode] - state.rho.values[inode]) / dx;
        const double phix = (phi.values[periodic ? (i + 1) % np : i + 1] - phi.values[i]) / dx;
        const double rho_mid = 0.5 * (state.rho.values[inode] + state.rho.values[ipnode]);

        for (int j = 0; j < nv; ++j) row[j] = state.psi.at(i, j);
        std::vector<double> cpsi = apply_v_derivative(grid, row);

        for (int j = 0; j < nv; ++j) {
            const double v = grid.nodes[j];
            const double dpsi =
                v > 0.0 ? (row[j] - psi_at(i - 1, j)) / dx : (psi_at(i + 1, j) - row[j]) / dx;
            trans[j] = v * dpsi + phix * (cpsi[j] - 2.0 * v * row[j]);
        }
        double tmean = bracket(grid, trans);
        for (int j = 0; j < nv; ++j) {
            const double v = grid.nodes[j];
            const double E = v * drho + eps * (trans[j] - tmean) - 2.0 * v * rho_mid * phix;
            rhs[j] = eps * eps * row[j] - dt * E;
        }
        if (const_kernel) {
            for (int j = 0; j < nv; ++j)
                next.psi.at(i, j) = rhs[j] / (eps * eps + dt * ctx.lambda_nodes[j]);
        } else {
            Eigen::Map<const Eigen::VectorXd> b(rhs.data(), nv);
            Eigen::VectorXd sol = lu.solve(b);
            for (int j = 0; j < nv; ++j) next.psi.at(i, j) = sol(j);
        }
    }

    // (iii) discrete mean subtraction
    for (int i = 0; i < nh; ++i) {
        double m = 0.0;
        for (int j = 0; j < nv; ++j) m += next.psi.at(i, j) * grid.weights[j];
        for (int j = 0; j < nv; ++j) next.psi.at(i, j) -= m;
    }

    // (iv) macro update from the post-collision micro field: compact flux
    // differences of <v g> plus the potential term with <d_v g>.
    std::vector<double> flux(nh), dvg(nh);
    for (int i = 0; i < nh; ++i) {
        double f = 0.0, d = 0.0;
        for (int j = 0; j < nv; ++j) row[j] = next.psi.at(i, j);
        std::vector<double> cpsi = apply_v_derivative(grid, row);
        for (int j = 0; j < nv; ++j) {
            const double v = grid.nodes[j];
            f += v * row[j] * grid.weights[j];
            d += (cpsi[j] - 2.0 * v * row[j]) * grid.weights[j];
        }
        flux[i] = f;
        dvg[i] = d;
    }
    const int ilo = periodic ? 0 : 1;
    const int ihi = periodic ? np - 1 : nx - 2;
    for (int i = ilo; i <= ihi; ++i) {
        double fl, fr, dl, dr;
        if (periodic) {
            fl = flux[(i + nh - 1) % nh];
            fr = flux[i % nh];
            dl = dvg[(i + nh - 1) % nh];
            dr = dvg[i % nh];
        } else {
            fl = flux[i - 1];
            fr = flux[i];
            dl = dvg[i - 1];
            dr = dvg[i];
        }
        const double dflux = (fr - fl) / dx;
        next.rho.values[i] = state.rho.values[i] - dt * (phi.grad[i] * 0.5 * (dl + dr) + dflux);
    }
    if (periodic)
        next.rho.values[nx - 1] = next.rho.values[0];
    else {
        next.rho.values[0] = bc.rho_left;
        next.rho.values[nx - 1] = bc.rho_right;
    }

    next.step_count = state.step_count + 1;
    if (!all_finite(next.rho.values) || !all_finite(next.psi.psi))
        throw std::runtime_error("refsolver: non-finite value at step " + std::to_string(next.step_count));
    return next;
}

Trajectory run(const SolverConfig& cfg, const CollisionContext& ctx, KineticState state, double t_end) {
    Trajectory traj;
    traj.x_lo = cfg.x_lo;
    traj.dx = cfg.dx;
    traj.has_phi = cfg.poisson_enabled || !cfg.phi_fixed.empty();

    const long n_steps = std::lround((t_end - state.time()) / cfg.dt);
    auto record = [&](const KineticState& s) {
        traj.times.push_back(s.time());
        traj.rho.push_back(s.rho);
        traj.phi.push_back(s.phi);
        traj.psi.push_back(psi_at_nodes(s));
    };
    record(state);
    for (long k = 0; k < n_steps; ++k) {
        state = step(state, cfg, ctx);
        if (k + 1 == n_steps || (cfg.snapshot_stride > 0 && state.step_count % cfg.snapshot_stride == 0))
            record(state);
    }
    return traj;
}

Trajectory run(const SolverConfig& cfg, const CollisionContext& ctx) {
    return run(cfg, ctx, init_state(cfg, ctx), cfg.t_final);
}

Trajectory solve_drift_diffusion(const SolverConfig& cfg, double t_mobility) {
    const int nx = cfg.n_x();
    const double dx = cfg.dx;
    const double dt = cfg.dt;
    if (!(dt <= dx * dx / (4.0 * t_mobility) * (1.0 + 1e-12)))
        throw std::invalid_argument("solve_drift_diffusion: dt must satisfy dt <= dx^2/(4T)");
    const bool periodic = cfg.bc == BcKind::Periodic;
    const int np = nx - 1;

    MacroField rho;
    rho.values = cfg.rho_ic;
    rho.dx = dx;
    PotentialField phi;
    if (cfg.poisson_enabled)
        phi = solve_poisson(rho, cfg);
    else if (!cfg.phi_fixed.empty())
        phi = make_potential(cfg.phi_fixed, dx);
    else
        phi = make_potential(std::vector<double>(nx, 0.0), dx);

    double rho_left = 1.0, rho_right = 1.0;
    if (!periodic && !cfg.inflow_left.empty()) {
        // Dirichlet rho = <F/M>_w, the diffusive limit of the inflow data.
        VelocityGrid grid = build_velocity_grid((int)cfg.inflow_left.size());
        double rl = 0.0, rr = 0.0;
        for (int j = 0; j < grid.n_nodes; ++j) {
            rl += cfg.inflow_left[j] / maxwellian(grid.nodes[j]) * grid.weights[j];
            rr += cfg.inflow_right[j] / maxwellian(grid.nodes[j]) * grid.weights[j];
        }
        rho_left = rl;
        rho_right = rr;
    }
    if (!periodic) {
        rho.values[0] = rho_left;
        rho.values[nx - 1] = rho_right;
    }

    Trajectory traj;
    traj.x_lo = cfg.x_lo;
    traj.dx = dx;
    traj.has_phi = cfg.poisson_enabled || !cfg.phi_fixed.empty();

    const long n_steps = std::lround(cfg.t_final / dt);
    auto record = [&](long k) {
        traj.times.push_back(k * dt);
        traj.rho.push_back(rho);
        traj.phi.push_back(phi);
        traj.psi.emplace_back();
    };
    record(0);

    // flux form: G_{i+1/2} = T [ (rho_{i+1} - rho_i)/dx - (rho_i + rho_{i+1}) (phi_{i+1} - phi_i)/dx ]
    const int nh = nx - 1;
    std::vector<double> G(nh);
    std::vector<double> nrho = rho.values;
    const int ilo = periodic ? 0 : 1;
    const int ihi = periodic ? np - 1 : nx - 2;
    for (long k = 0; k < n_steps; ++k) {
        if (cfg.poisson_enabled) phi = solve_poisson(rho, cfg);
        for (int i = 0; i < nh; ++i) {
            const int ip = periodic ? (i + 1) % np : i + 1;
            const double dphid = (phi.values[i + 1] - phi.values[i]) / dx;
            G[i] = t_mobility * ((rho.values[ip] - rho.values[i]) / dx -
                                 (rho.values[i] + rho.values[ip]) * dphid);
        }
        for (int i = ilo; i <= ihi; ++i) {
            const double gl = periodic ? G[(i + nh - 1) % nh] : G[i - 1];
            const double gr = periodic ? G[i % nh] : G[i];
            nrho[i] = rho.values[i] + dt * (gr - gl) / dx;
        }
        if (periodic) nrho[nx - 1] = nrho[0];
        rho.values = nrho;
        if (!all_finite(rho.values))
            throw std::runtime_error("solve_drift_diffusion: non-finite value at step " + std::to_string(k + 1));
        if (k + 1 == n_steps || (cfg.snapshot_stride > 0 && (k + 1) % cfg.snapshot_stride == 0)) record(k + 1);
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::string out = traj.has_phi ? "t,x,rho,phi\n" : "t,x,rho\n";
    for (int s = 0; s < traj.n_snapshots(); ++s) {
        for (int i = 0; i < traj.rho[s].n(); ++i) {
            format17(out, traj.times[s]);
            out += ',';
            format17(out, traj.x(i));
            out += ',';
            format17(out, traj.rho[s].values[i]);
            if (traj.has_phi) {
                out += ',';
                format17(out, traj.phi[s].values[i]);
            }
            out += '\n';
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    f << out;
}

void write_psi_csv(const Trajectory& traj, const VelocityGrid& grid, const std::string& path) {
    std::string out = "t,x,v,psi\n";
    for (int s = 0; s < traj.n_snapshots(); ++s) {
        const MicroField& f = traj.psi[s];
        for (int i = 0; i < f.n_x; ++i)
            for (int j = 0; j < f.n_v; ++j) {
                format17(out, traj.times[s]);
                out += ',';
                format17(out, traj.x(i));
                out += ',';
                format17(out, grid.nodes[j]);
                out += ',';
                format17(out, f.at(i, j));
                out += '\n';
            }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_psi_csv: cannot open " + path);
    f << out;
}

Trajectory read_trajectory_csv(const std::string& rho_path, const std::string& psi_path,
                               const VelocityGrid& grid) {
    std::ifstream in(rho_path);
    if (!in) throw std::runtime_error("read_trajectory_csv: cannot open " + rho_path);
    std::string line;
    std::getline(in, line);
    const bool has_phi = line.find("phi") != std::string::npos;

    Trajectory traj;
    traj.has_phi = has_phi;
    std::vector<double> xs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        double vals[4] = {0, 0, 0, 0};
        int c = 0;
        while (std::getline(ss, cell, ',') && c < 4) vals[c++] = std::stod(cell);
        double t = vals[0], x = vals[1];
        if (traj.times.empty() || t != traj.times.back()) {
            traj.times.push_back(t);
            traj.rho.emplace_back();
            traj.phi.emplace_back();
            traj.psi.emplace_back();
        }
        traj.rho.back().values.push_back(vals[2]);
        if (has_phi) traj.phi.back().values.push_back(vals[3]);
        if (traj.times.size() == 1) xs.push_back(x);
    }
    if (xs.size() < 2) throw std::runtime_error("read_trajectory_csv: too few grid points");
    traj.x_lo = xs[0];
    traj.dx = xs[1] - xs[0];
    for (auto& r : traj.rho) r.dx = traj.dx;
    for (auto& p : traj.phi)
        if (!p.values.empty()) p = make_potential(p.values, traj.dx);

    if (!psi_path.empty()) {
        std::ifstream pin(psi_path);
        if (!pin) throw std::runtime_error("read_trajectory_csv: cannot open " + psi_path);
        std::getline(pin, line);
        const int nx = (int)xs.size();
        const int nv = grid.n_nodes;
        size_t snap = 0, count = 0;
        while (std::getline(pin, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            double vals[4] = {0, 0, 0, 0};
            int c = 0;
            while (std::getline(ss, cell, ',') && c < 4) vals[c++] = std::stod(cell);
            if (count == 0) {
                if (snap >= traj.psi.size()) throw std::runtime_error("read_trajectory_csv: psi snapshots exceed rho");
                traj.psi[snap] = MicroField::zeros(nx, nv);
            }
            traj.psi[snap].psi[count] = vals[3];
            if (++count == (size_t)nx * nv) {
                count = 0;
                ++snap;
            }
        }
    }
    return traj;
}

}  // namespace semikin
