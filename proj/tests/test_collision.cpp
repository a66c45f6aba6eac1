#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "semikin/collision.hpp"

using namespace semikin;

namespace {

std::vector<double> random_psi(int n, std::mt19937_64& gen) {
    std::vector<double> v(n);
    for (double& x : v) x = 2.0 * ((gen() >> 11) * 0x1.0p-53) - 1.0;
    return v;
}

}  // namespace

TEST_CASE("collision frequency") {
    VelocityGrid g = build_velocity_grid(8);
    CollisionContext c2(g, ScatteringKernel::constant(2.0));
    for (int i = 0; i < 8; ++i) CHECK(std::abs(collision_frequency(c2, i) - 2.0) < 1e-14);

    CollisionContext c7(g, ScatteringKernel::constant(0.7));
    for (int i = 0; i < 8; ++i) CHECK(std::abs(collision_frequency(c7, i) - 0.7) < 1e-14);

    // sigma(v, w) = 1 + v^2 w^2  ->  lambda(v) = 1 + v^2 / 2
    std::vector<double> table(64);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            table[i * 8 + j] = 1.0 + g.nodes[i] * g.nodes[i] * g.nodes[j] * g.nodes[j];
    CollisionContext ct(g, ScatteringKernel::tabulated(table, 8));
    for (int i = 0; i < 8; ++i)
        CHECK(std::abs(collision_frequency(ct, i) - (1.0 + 0.5 * g.nodes[i] * g.nodes[i])) < 1e-12);
}

TEST_CASE("Q annihilates multiples of M") {
    VelocityGrid g = build_velocity_grid(8);
    CollisionContext ctx(g, ScatteringKernel::constant(2.0));
    std::vector<double> c(8, 0.37);
    auto q = apply_Q_psi(ctx, c);
    for (double x : q) CHECK(std::abs(x) < 1e-14);
}

TEST_CASE("constant kernel on zero-mean input is -sigma psi") {
    VelocityGrid g = build_velocity_grid(8);
    CollisionContext ctx(g, ScatteringKernel::constant(2.0));
    std::mt19937_64 gen(5);
    auto psi = random_psi(8, gen);
    double mean = 0.0;
    for (int j = 0; j < 8; ++j) mean += psi[j] * g.weights[j];
    for (int j = 0; j < 8; ++j) psi[j] -= mean;
    auto q = apply_Q_psi(ctx, psi);
    for (int j = 0; j < 8; ++j) CHECK(std::abs(q[j] + 2.0 * psi[j]) < 1e-14);
}

TEST_CASE("mass conservation for symmetric kernels (property)") {
    VelocityGrid g = build_velocity_grid(8);
    std::mt19937_64 gen(9);
    std::vector<double> table(64);
    for (int i = 0; i < 8; ++i)
        for (int j = i; j < 8; ++j) {
            double s = 1.0 + (gen() >> 11) * 0x1.0p-53;
            table[i * 8 + j] = s;
            table[j * 8 + i] = s;
        }
    CollisionContext ctx(g, ScatteringKernel::tabulated(table, 8));
    REQUIRE(ctx.kernel.symmetric);

    for (int trial = 0; trial < 25; ++trial) {
        auto psi = random_psi(8, gen);
        auto q = apply_Q_psi(ctx, psi);
        double mass = 0.0;
        for (int j = 0; j < 8; ++j) mass += q[j] * g.weights[j];
        CHECK(std::abs(mass) < 1e-12);

        // cross-check against the direct double-sum oracle
        for (int i = 0; i < 8; ++i) {
            double gain = 0.0;
            for (int j = 0; j < 8; ++j) gain += table[i * 8 + j] * psi[j] * g.weights[j];
            double lam = 0.0;
            for (int j = 0; j < 8; ++j) lam += table[i * 8 + j] * g.weights[j];
            CHECK(std::abs(q[i] - (gain - lam * psi[i])) < 1e-13);
        }
    }
}

TEST_CASE("apply_Q_psi is linear (property)") {
    VelocityGrid g = build_velocity_grid(8);
    CollisionContext ctx(g, ScatteringKernel::constant(2.0));
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 20; ++trial) {
        auto p1 = random_psi(8, gen);
        auto p2 = random_psi(8, gen);
        double a = 2.0 * ((gen() >> 11) * 0x1.0p-53) - 1.0;
        double b = 2.0 * ((gen() >> 11) * 0x1.0p-53) - 1.0;
        std::vector<double> comb(8);
        for (int j = 0; j < 8; ++j) comb[j] = a * p1[j] + b * p2[j];
        auto qc = apply_Q_psi(ctx, comb);
        auto q1 = apply_Q_psi(ctx, p1);
        auto q2 = apply_Q_psi(ctx, p2);
        for (int j = 0; j < 8; ++j) CHECK(std::abs(qc[j] - a * q1[j] - b * q2[j]) < 1e-12);
    }
}

TEST_CASE("mobility constant") {
    VelocityGrid g8 = build_velocity_grid(8);
    CollisionContext c2(g8, ScatteringKernel::constant(2.0));
    CHECK(std::abs(mobility_constant(c2) - 0.25) < 1e-13);

    CollisionContext c1(g8, ScatteringKernel::constant(1.0));
    CHECK(std::abs(mobility_constant(c1) - 0.5) < 1e-13);

    VelocityGrid g32 = build_velocity_grid(32);
    CollisionContext c2b(g32, ScatteringKernel::constant(2.0));
    CHECK(std::abs(mobility_constant(c2b) - mobility_constant(c2)) < 1e-13);
}

TEST_CASE("kernel CSV loading") {
    VelocityGrid g = build_velocity_grid(4);
    {
        std::ofstream f("kernel_test.csv");
        f << "2,2,2,2\n2,2,2,2\n2,2,2,2\n2,2,2,2\n";
    }
    ScatteringKernel k = load_kernel_csv("kernel_test.csv", 4);
    CHECK(k.kind == ScatteringKernel::Kind::Tabulated);
    CHECK(k.symmetric);
    CollisionContext ctx(g, k);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(collision_frequency(ctx, i) - 2.0) < 1e-14);

    CHECK_THROWS_AS(load_kernel_csv("kernel_test.csv", 5), std::invalid_argument);
    CHECK_THROWS_AS(load_kernel_csv("no_such_file.csv", 4), std::invalid_argument);
    std::remove("kernel_test.csv");
}

TEST_CASE("kernel validation") {
    CHECK_THROWS_AS(ScatteringKernel::constant(-1.0), std::invalid_argument);
    std::vector<double> bad(16, 1.0);
    bad[3] = -2.0;
    CHECK_THROWS_AS(ScatteringKernel::tabulated(bad, 4), std::invalid_argument);
}
