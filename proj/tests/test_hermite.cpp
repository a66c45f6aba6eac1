#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "semikin/collision.hpp"
#include "semikin/hermite.hpp"

using namespace semikin;

namespace {

// Brute-force trapezoid integration of f(v) M(v) over [-L, L].
double trapz_maxwellian(double (*f)(double), int n_pts = 1'000'000, double L = 12.0) {
    double h = 2.0 * L / (n_pts - 1);
    double s = 0.0;
    for (int i = 0; i < n_pts; ++i) {
        double v = -L + i * h;
        double w = (i == 0 || i == n_pts - 1) ? 0.5 : 1.0;
        s += w * f(v) * maxwellian(v);
    }
    return s * h;
}

double eval_poly(const std::vector<double>& c, double v) {
    double s = 0.0;
    for (int k = (int)c.size() - 1; k >= 0; --k) s = s * v + c[k];
    return s;
}

// Exact Maxwellian moments: int v^k M dv = 0 (odd), (k-1)!! / 2^{k/2} (even).
double exact_moment(int k) {
    if (k % 2 == 1) return 0.0;
    double m = 1.0;
    for (int j = k - 1; j >= 1; j -= 2) m *= j;
    return m / std::pow(2.0, k / 2);
}

}  // namespace

TEST_CASE("one- and two-point rules") {
    VelocityGrid g1 = build_velocity_grid(1, 0);
    CHECK(g1.nodes[0] == 0.0);
    CHECK(g1.weights[0] == doctest::Approx(1.0));

    VelocityGrid g2 = build_velocity_grid(2);
    CHECK(g2.nodes[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(g2.nodes[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(g2.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(g2.weights[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("grid invariants at n = 8") {
    VelocityGrid g = build_velocity_grid(8);
    double wsum = 0.0, m2 = 0.0, m4 = 0.0;
    for (int j = 0; j < 8; ++j) {
        CHECK(std::abs(g.nodes[j] + g.nodes[7 - j]) < 1e-14);
        wsum += g.weights[j];
        m2 += g.nodes[j] * g.nodes[j] * g.weights[j];
        m4 += std::pow(g.nodes[j], 4) * g.weights[j];
    }
    CHECK(std::abs(wsum - 1.0) < 1e-14);
    CHECK(std::abs(m2 - 0.5) < 1e-13);
    CHECK(std::abs(m4 - 0.75) < 1e-12);

    // m4 against the brute-force oracle as well
    double m4_oracle = trapz_maxwellian(+[](double v) { return v * v * v * v; });
    CHECK(std::abs(m4 - m4_oracle) < 1e-9);

    // discrete orthonormality
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
            double s = 0.0;
            for (int j = 0; j < 8; ++j) s += g.h(a, j) * g.h(b, j) * g.weights[j];
            CHECK(std::abs(s - (a == b ? 1.0 : 0.0)) < 1e-12);
        }

    // derivative matrix rows sum to zero
    for (int i = 0; i < 8; ++i) {
        double s = 0.0;
        for (int j = 0; j < 8; ++j) s += g.d(i, j);
        CHECK(std::abs(s) < 1e-12);
    }
}

TEST_CASE("quadrature exactness up to degree 2n-1 (property)") {
    VelocityGrid g = build_velocity_grid(8);
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> coeffs(16);   // degree 15 = 2n-1
        for (double& c : coeffs) c = 2.0 * ((gen() >> 11) * 0x1.0p-53) - 1.0;
        double quad = 0.0;
        for (int j = 0; j < 8; ++j) quad += eval_poly(coeffs, g.nodes[j]) * g.weights[j];
        double exact = 0.0;
        for (int k = 0; k < 16; ++k) exact += coeffs[k] * exact_moment(k);
        CHECK(std::abs(quad - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("hermite_eval basics") {
    CHECK(hermite_eval(0, 3.7) == 1.0);
    CHECK(hermite_eval(1, 3.7) == doctest::Approx(std::sqrt(2.0) * 3.7).epsilon(1e-15));
    CHECK(hermite_eval(1, -0.3) == doctest::Approx(-std::sqrt(2.0) * 0.3).epsilon(1e-15));

    double norm_h2 = trapz_maxwellian(+[](double v) {
        double h2 = hermite_eval(2, v);
        return h2 * h2;
    });
    CHECK(std::abs(norm_h2 - 1.0) < 1e-10);
}

TEST_CASE("analyze picks out coefficients") {
    VelocityGrid g = build_velocity_grid(8);
    std::vector<double> ones(8, 1.0);
    auto c = analyze(g, ones);
    CHECK(std::abs(c[0] - 1.0) < 1e-12);
    for (int k = 1; k <= 7; ++k) CHECK(std::abs(c[k]) < 1e-12);

    std::vector<double> h2(8);
    for (int j = 0; j < 8; ++j) h2[j] = g.h(2, j);
    c = analyze(g, h2);
    for (int k = 0; k <= 7; ++k) CHECK(std::abs(c[k] - (k == 2 ? 1.0 : 0.0)) < 1e-12);

    CHECK_THROWS_AS(analyze(g, std::vector<double>(5, 0.0)), std::invalid_argument);
}

TEST_CASE("synthesize/analyze round-trip on random polynomials (property)") {
    VelocityGrid g = build_velocity_grid(8);
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> poly(8);
        for (double& c : poly) c = 2.0 * ((gen() >> 11) * 0x1.0p-53) - 1.0;
        std::vector<double> vals(8);
        double vmax = 0.0;
        for (int j = 0; j < 8; ++j) {
            vals[j] = eval_poly(poly, g.nodes[j]);
            vmax = std::max(vmax, std::abs(vals[j]));
        }
        for (double& v : vals) v /= vmax;
        auto coeffs = analyze(g, vals);
        for (int j = 0; j < 8; ++j) {
            CHECK(std::abs(synthesize_at_node(g, coeffs, j) - vals[j]) < 1e-11);
            CHECK(std::abs(synthesize(g, coeffs, g.nodes[j]) - vals[j]) < 1e-11);
        }
    }

    std::vector<double> zero(8, 0.0);
    CHECK(synthesize(g, zero, 1.234) == 0.0);
    std::vector<double> e0(8, 0.0);
    e0[0] = 1.0;
    CHECK(synthesize(g, e0, -2.2) == 1.0);

    std::vector<double> vnode(8);
    for (int j = 0; j < 8; ++j) vnode[j] = g.nodes[j];
    auto coeffs = analyze(g, vnode);
    for (int j = 0; j < 8; ++j) CHECK(std::abs(synthesize_at_node(g, coeffs, j) - g.nodes[j]) < 1e-12);
}

TEST_CASE("apply_v_derivative") {
    VelocityGrid g = build_velocity_grid(8);

    std::vector<double> c3(8, 3.0);
    auto d = apply_v_derivative(g, c3);
    for (double x : d) CHECK(std::abs(x) < 1e-12);

    std::vector<double> vn(8), v2(8);
    for (int j = 0; j < 8; ++j) {
        vn[j] = g.nodes[j];
        v2[j] = g.nodes[j] * g.nodes[j];
    }
    d = apply_v_derivative(g, vn);
    for (double x : d) CHECK(std::abs(x - 1.0) < 1e-11);
    d = apply_v_derivative(g, v2);
    for (int j = 0; j < 8; ++j) CHECK(std::abs(d[j] - 2.0 * g.nodes[j]) < 1e-10);
}

TEST_CASE("derivative commutes with analytic derivative up to degree N (property)") {
    VelocityGrid g = build_velocity_grid(8);
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> poly(8);   // degree 7 = N
        for (double& c : poly) c = (2.0 * ((gen() >> 11) * 0x1.0p-53) - 1.0) / 1024.0;
        std::vector<double> dpoly(7);
        for (int k = 1; k < 8; ++k) dpoly[k - 1] = k * poly[k];
        std::vector<double> vals(8);
        for (int j = 0; j < 8; ++j) vals[j] = eval_poly(poly, g.nodes[j]);
        auto d = apply_v_derivative(g, vals);
        for (int j = 0; j < 8; ++j) CHECK(std::abs(d[j] - eval_poly(dpoly, g.nodes[j])) < 1e-10);
    }
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(build_velocity_grid(0), std::invalid_argument);
    CHECK_THROWS_AS(build_velocity_grid(4, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_velocity_grid(4, -1), std::invalid_argument);
}
