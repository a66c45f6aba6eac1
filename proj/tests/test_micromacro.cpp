#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "semikin/micromacro.hpp"
#include "semikin/refsolver.hpp"

using namespace semikin;

namespace {

std::vector<double> random_vec(int n, std::mt19937_64& gen) {
    std::vector<double> v(n);
    for (double& x : v) x = 2.0 * ((gen() >> 11) * 0x1.0p-53) - 1.0;
    return v;
}

double l2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("bracket moments") {
    VelocityGrid g = build_velocity_grid(8);
    std::vector<double> ones(8, 1.0), vn(8), v2(8);
    for (int j = 0; j < 8; ++j) {
        vn[j] = g.nodes[j];
        v2[j] = g.nodes[j] * g.nodes[j];
    }
    CHECK(std::abs(bracket(g, ones) - 1.0) < 1e-14);
    CHECK(std::abs(bracket(g, vn)) < 1e-14);
    CHECK(std::abs(bracket(g, v2) - 0.5) < 1e-13);
}

TEST_CASE("projection operator") {
    VelocityGrid g = build_velocity_grid(8);
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto psi = random_vec(8, gen);
        auto p = project_pi(g, psi);
        auto pp = project_pi(g, p);
        for (int j = 0; j < 8; ++j) CHECK(pp[j] == p[j]);

        // (I - Pi) then Pi is zero
        std::vector<double> res(8);
        for (int j = 0; j < 8; ++j) res[j] = psi[j] - p[j];
        auto ppr = project_pi(g, res);
        for (int j = 0; j < 8; ++j) CHECK(std::abs(ppr[j]) < 1e-13);
    }

    std::vector<double> h1(8);
    for (int j = 0; j < 8; ++j) h1[j] = g.h(1, j);
    auto p = project_pi(g, h1);
    for (int j = 0; j < 8; ++j) CHECK(std::abs(p[j]) < 1e-13);

    std::vector<double> zm = random_vec(8, gen);
    double m = bracket(g, zm);
    for (double& x : zm) x -= m;
    p = project_pi(g, zm);
    for (int j = 0; j < 8; ++j) CHECK(std::abs(p[j]) < 1e-14);
}

TEST_CASE("macro_residual trivial and manufactured") {
    VelocityGrid g = build_velocity_grid(8);
    const int nx = 51;
    const double dx = 1.0 / (nx - 1);

    MicroField zero = MicroField::zeros(nx, 8);
    PotentialField phi = make_potential(std::vector<double>(nx, 0.3), dx);
    std::vector<double> drho(nx, 0.0);
    auto r = macro_residual(drho, zero, phi, g);
    for (double x : r) CHECK(x == 0.0);

    // psi(x, v) = a(x) h_1(v)/sqrt(2) = a(x) v with a linear: <v g> = a(x)/2,
    // central/one-sided differences are exact for linear a.
    MicroField mf = MicroField::zeros(nx, 8);
    for (int i = 0; i < nx; ++i) {
        double a = 0.3 + 0.7 * (i * dx);
        for (int j = 0; j < 8; ++j) mf.at(i, j) = a * g.h(1, j) / std::sqrt(2.0);
    }
    double flux_slope = 0.7 / 2.0;
    std::vector<double> drho2(nx, -flux_slope);
    PotentialField phi0 = make_potential(std::vector<double>(nx, 0.0), dx);
    r = macro_residual(drho2, mf, phi0, g);
    for (double x : r) CHECK(std::abs(x) < 1e-10);
}

TEST_CASE("micro_residual: equilibrium and closed-form inverse") {
    VelocityGrid g = build_velocity_grid(8);
    CollisionContext ctx(g, ScatteringKernel::constant(2.0));
    const int nx = 41;
    const double dx = 1.0 / (nx - 1);

    MacroField rho;
    rho.values.assign(nx, 1.0);
    rho.dx = dx;
    MicroField zg = MicroField::zeros(nx, 8);
    PotentialField phic = make_potential(std::vector<double>(nx, 0.5), dx);
    auto r = micro_residual(rho, zg, zg, phic, g, 0.0, ctx);
    for (double x : r.psi) CHECK(std::abs(x) < 1e-15);

    // sigma = 2, eps = 0, phi = 0: psi* = -v dx(rho)/2 makes the residual vanish
    MacroField rs;
    rs.dx = dx;
    rs.values.resize(nx);
    for (int i = 0; i < nx; ++i) rs.values[i] = 1.0 + 0.1 * std::sin(2.0 * M_PI * i * dx);
    auto drho = grid_gradient(rs.values, dx);
    MicroField psi_star = MicroField::zeros(nx, 8);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < 8; ++j) psi_star.at(i, j) = -g.nodes[j] * drho[i] / 2.0;
    PotentialField phi0 = make_potential(std::vector<double>(nx, 0.0), dx);
    r = micro_residual(rs, psi_star, MicroField::zeros(nx, 8), phi0, g, 0.0, ctx);
    for (double x : r.psi) CHECK(std::abs(x) < 1e-10);

    // cross-check closed form against an augmented linear solve of Q(psi) = v drho
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(8, 8);
    for (int j = 0; j < 8; ++j) {
        A(j, j) += 2.0;
        for (int k = 0; k < 8; ++k) A(j, k) += (1.0 - 2.0) * g.weights[k];
    }
    Eigen::VectorXd rhs(8);
    for (int j = 0; j < 8; ++j) rhs(j) = -g.nodes[j] * drho[nx / 2];
    Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
    for (int j = 0; j < 8; ++j) CHECK(std::abs(sol(j) - psi_star.at(nx / 2, j)) < 1e-12);
}

TEST_CASE("AP structural identity: micro_residual at eps=0 equals limit_residual") {
    VelocityGrid g = build_velocity_grid(8);
    CollisionContext ctx(g, ScatteringKernel::constant(2.0));
    const int nx = 17;
    std::mt19937_64 gen(21);
    MacroField rho;
    rho.dx = 1.0 / (nx - 1);
    rho.values = random_vec(nx, gen);
    MicroField mf;
    mf.n_x = nx;
    mf.n_v = 8;
    mf.psi = random_vec(nx * 8, gen);
    MicroField dpsi;
    dpsi.n_x = nx;
    dpsi.n_v = 8;
    dpsi.psi = random_vec(nx * 8, gen);
    PotentialField phi = make_potential(random_vec(nx, gen), rho.dx);

    auto a = micro_residual(rho, mf, dpsi, phi, g, 0.0, ctx);
    auto b = limit_residual(rho, mf, phi, g, ctx);
    for (size_t k = 0; k < a.psi.size(); ++k) CHECK(a.psi[k] == b.psi[k]);
}

TEST_CASE("projection removes the mean of the eps-terms") {
    VelocityGrid g = build_velocity_grid(8);
    CollisionContext ctx(g, ScatteringKernel::constant(2.0));
    const int nx = 17;
    std::mt19937_64 gen(33);
    MacroField rho;
    rho.dx = 1.0 / (nx - 1);
    rho.values = random_vec(nx, gen);
    MicroField mf;
    mf.n_x = nx;
    mf.n_v = 8;
    mf.psi = random_vec(nx * 8, gen);
    MicroField zero_dt = MicroField::zeros(nx, 8);
    PotentialField phi = make_potential(random_vec(nx, gen), rho.dx);

    auto r1 = micro_residual(rho, mf, zero_dt, phi, g, 1.0, ctx);
    auto r0 = micro_residual(rho, mf, zero_dt, phi, g, 0.0, ctx);
    for (int i = 0; i < nx; ++i) {
        std::vector<double> diff(8);
        for (int j = 0; j < 8; ++j) diff[j] = r1.at(i, j) - r0.at(i, j);
        CHECK(std::abs(bracket(g, diff)) < 1e-12);
    }
}

TEST_CASE("macro residual of solver output decreases under refinement") {
    VelocityGrid g = build_velocity_grid(8);
    CollisionContext ctx(g, ScatteringKernel::constant(2.0));

    auto residual_norm = [&](int nx, double dt) {
        SolverConfig cfg;
        cfg.eps = 1.0;
        cfg.dx = 1.0 / (nx - 1);
        cfg.dt = dt;
        cfg.t_final = 0.02;
        cfg.bc = BcKind::Inflow;
        cfg.rho_ic.assign(nx, 1.0);
        cfg.inflow_left.resize(8);
        cfg.inflow_right.resize(8);
        for (int j = 0; j < 8; ++j)
            cfg.inflow_left[j] = cfg.inflow_right[j] = maxwellian(g.nodes[j]);
        cfg.phi_fixed.resize(nx);
        for (int i = 0; i < nx; ++i) {
            double x = i * cfg.dx;
            cfg.phi_fixed[i] = std::exp(-50.0 * std::exp(1.0) * (0.25 - x) * (0.25 - x));
        }
        cfg.snapshot_stride = (int)std::lround(0.005 / dt);

        Trajectory traj = run(cfg, ctx);
        int s = traj.n_snapshots() / 2;
        double dsnap = traj.times[s + 1] - traj.times[s - 1];
        const int n = cfg.n_x();
        std::vector<double> drho(n);
        for (int i = 0; i < n; ++i)
            drho[i] = (traj.rho[s + 1].values[i] - traj.rho[s - 1].values[i]) / dsnap;
        PotentialField phi = make_potential(cfg.phi_fixed, cfg.dx);
        auto r = macro_residual(drho, traj.psi[s], phi, g);
        std::vector<double> interior(r.begin() + 1, r.end() - 1);
        return l2(interior) / std::sqrt((double)interior.size());
    };

    double coarse = residual_norm(26, 8e-4);
    double fine = residual_norm(51, 4e-4);
    CHECK(fine < coarse);
    CHECK(fine < 0.75 * coarse);
}

TEST_CASE("shape validation") {
    VelocityGrid g = build_velocity_grid(8);
    CollisionContext ctx(g, ScatteringKernel::constant(2.0));
    MacroField rho;
    rho.values.assign(10, 1.0);
    rho.dx = 0.1;
    MicroField mf = MicroField::zeros(9, 8);
    PotentialField phi = make_potential(std::vector<double>(10, 0.0), 0.1);
    CHECK_THROWS_AS(limit_residual(rho, mf, phi, g, ctx), std::invalid_argument);
    std::vector<double> drho(10, 0.0);
    CHECK_THROWS_AS(macro_residual(drho, mf, phi, g), std::invalid_argument);
}
