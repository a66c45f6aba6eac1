#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "semikin/net.hpp"

using namespace semikin;

namespace {

double u01(std::mt19937_64& gen) { return (gen() >> 11) * 0x1.0p-53; }

// central finite difference of a scalar functional of the parameters
template <typename F>
std::vector<double> fd_param_gradient(Mlp net, F loss, double h = 1e-5) {
    std::vector<double> p;
    net.get_params(p);
    std::vector<double> g(p.size());
    for (size_t i = 0; i < p.size(); ++i) {
        std::vector<double> pp = p;
        pp[i] = p[i] + h;
        net.set_params(pp);
        double up = loss(net);
        pp[i] = p[i] - h;
        net.set_params(pp);
        double dn = loss(net);
        g[i] = (up - dn) / (2.0 * h);
    }
    net.set_params(p);
    return g;
}

}  // namespace

TEST_CASE("xavier init: determinism, shape, bounds") {
    std::vector<int> widths{3, 128, 128, 128, 128, 1};
    Mlp a = xavier_init(widths, 42);
    Mlp b = xavier_init(widths, 42);
    CHECK(a.n_layers() == 5);   // 4 hidden + output
    std::vector<double> pa, pb;
    a.get_params(pa);
    b.get_params(pb);
    REQUIRE(pa.size() == pb.size());
    for (size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);

    Mlp c = xavier_init(widths, 43);
    std::vector<double> pc;
    c.get_params(pc);
    bool differs = false;
    for (size_t i = 0; i < pa.size(); ++i) differs |= pa[i] != pc[i];
    CHECK(differs);

    // bounds per layer, >= 1e5 draws total across both nets; biases zero
    int n_draws = 0;
    for (const Mlp* net : {&a, &c}) {
        for (int l = 0; l < net->n_layers(); ++l) {
            double bound = std::sqrt(6.0 / (net->widths[l] + net->widths[l + 1]));
            for (int r = 0; r < net->W[l].rows(); ++r)
                for (int cidx = 0; cidx < net->W[l].cols(); ++cidx) {
                    CHECK(std::abs(net->W[l](r, cidx)) <= bound);
                    ++n_draws;
                }
            for (int r = 0; r < net->b[l].size(); ++r) CHECK(net->b[l](r) == 0.0);
        }
    }
    CHECK(n_draws >= 99000);

    CHECK_THROWS_AS(xavier_init({5}, 0), std::invalid_argument);
    CHECK_THROWS_AS(xavier_init({}, 0), std::invalid_argument);
}

TEST_CASE("single linear layer: input grads equal the weight row") {
    Mlp net = xavier_init({3, 1}, 7);
    auto out = forward(net, {0.2, -1.1, 0.4});
    REQUIRE(out.size() == 1);
    for (int i = 0; i < 3; ++i) CHECK(out[0].input_grads[i] == net.W[0](0, i));
    double expect = net.W[0](0, 0) * 0.2 + net.W[0](0, 1) * -1.1 + net.W[0](0, 2) * 0.4;
    CHECK(out[0].value == doctest::Approx(expect).epsilon(1e-15));

    CHECK_THROWS_AS(forward(net, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("input derivatives match central finite differences") {
    std::mt19937_64 gen(19);
    for (int trial = 0; trial < 10; ++trial) {
        Mlp net = xavier_init({2, 24, 24, 1}, 100 + trial);
        std::vector<double> x{2.0 * u01(gen) - 1.0, 2.0 * u01(gen) - 1.0};
        auto out = forward(net, x);
        const double h = 1e-5;
        for (int d = 0; d < 2; ++d) {
            std::vector<double> xp = x, xm = x;
            xp[d] += h;
            xm[d] -= h;
            double fd = (forward(net, xp)[0].value - forward(net, xm)[0].value) / (2.0 * h);
            double denom = std::max(1.0, std::abs(fd));
            CHECK(std::abs(out[0].input_grads[d] - fd) / denom < 1e-5);
        }
    }
}

TEST_CASE("tanh oddness: zero biases give an odd map") {
    Mlp net = xavier_init({2, 32, 32, 1}, 3);   // biases are zero by construction
    auto a = forward(net, {0.7, -0.3});
    auto b = forward(net, {-0.7, 0.3});
    CHECK(std::abs(a[0].value + b[0].value) < 1e-14);
}

TEST_CASE("batch evaluation agrees with single-sample forward") {
    Mlp net = xavier_init({3, 16, 16, 1}, 11);
    std::mt19937_64 gen(5);
    Eigen::MatrixXd X(3, 37);
    for (int c = 0; c < 37; ++c)
        for (int r = 0; r < 3; ++r) X(r, c) = 2.0 * u01(gen) - 1.0;
    BatchOutput out = batch_eval(net, X, {0, 1, 2});
    for (int c = 0; c < 37; ++c) {
        auto single = forward(net, {X(0, c), X(1, c), X(2, c)});
        CHECK(std::abs(out.value(0, c) - single[0].value) < 1e-14);
        for (int d = 0; d < 3; ++d)
            CHECK(std::abs(out.tangent[d](0, c) - single[0].input_grads[d]) < 1e-13);
    }
}

TEST_CASE("parameter gradient of a value-only scalar (linear net, hand oracle)") {
    Mlp net = xavier_init({2, 1}, 23);
    Eigen::MatrixXd X(2, 1);
    X << 0.3, -0.8;
    BatchOutput out = batch_eval(net, X, {});
    // loss = out^2: dL/dW = 2 out x^T, dL/db = 2 out
    Eigen::MatrixXd val_bar(1, 1);
    val_bar(0, 0) = 2.0 * out.value(0, 0);
    ParamGrad grad;
    grad.init(net);
    batch_grad(net, X, {}, val_bar, {}, grad);
    CHECK(grad.W[0](0, 0) == doctest::Approx(2.0 * out.value(0, 0) * 0.3).epsilon(1e-14));
    CHECK(grad.W[0](0, 1) == doctest::Approx(2.0 * out.value(0, 0) * -0.8).epsilon(1e-14));
    CHECK(grad.b[0](0) == doctest::Approx(2.0 * out.value(0, 0)).epsilon(1e-14));
}

TEST_CASE("parameter gradient of a derivative-containing scalar vs finite differences") {
    std::mt19937_64 gen(31);
    Mlp net = xavier_init({2, 12, 12, 1}, 77);
    Eigen::MatrixXd X(2, 5);
    for (int c = 0; c < 5; ++c)
        for (int r = 0; r < 2; ++r) X(r, c) = 2.0 * u01(gen) - 1.0;

    // L = sum_c (d out / d x1)^2
    auto loss = [&X](const Mlp& m) {
        BatchOutput o = batch_eval(m, X, {1});
        double s = 0.0;
        for (int c = 0; c < 5; ++c) s += o.tangent[0](0, c) * o.tangent[0](0, c);
        return s;
    };

    BatchOutput o = batch_eval(net, X, {1});
    Eigen::MatrixXd val_bar = Eigen::MatrixXd::Zero(1, 5);
    std::vector<Eigen::MatrixXd> tan_bar{Eigen::MatrixXd(1, 5)};
    for (int c = 0; c < 5; ++c) tan_bar[0](0, c) = 2.0 * o.tangent[0](0, c);
    ParamGrad grad;
    grad.init(net);
    batch_grad(net, X, {1}, val_bar, tan_bar, grad);
    std::vector<double> gflat;
    grad.flatten(gflat);

    std::vector<double> gfd = fd_param_gradient(net, loss);
    std::mt19937_64 pick(1);
    for (int k = 0; k < 20; ++k) {
        size_t i = pick() % gflat.size();
        double denom = std::max(1.0, std::abs(gfd[i]));
        CHECK(std::abs(gflat[i] - gfd[i]) / denom < 1e-4);
    }
}

TEST_CASE("zero fan-out: layers feeding a zeroed head get exact zero gradient") {
    Mlp net = xavier_init({2, 8, 8, 1}, 5);
    net.W[2].setZero();
    net.b[2].setZero();
    Eigen::MatrixXd X(2, 3);
    X << 0.1, 0.5, -0.2, 0.9, -0.7, 0.3;
    BatchOutput o = batch_eval(net, X, {});
    Eigen::MatrixXd val_bar(1, 3);
    for (int c = 0; c < 3; ++c) val_bar(0, c) = 2.0 * o.value(0, c);   // = 0
    ParamGrad grad;
    grad.init(net);
    batch_grad(net, X, {}, val_bar, {}, grad);
    for (int l = 0; l < 2; ++l) {
        for (int r = 0; r < grad.W[l].rows(); ++r)
            for (int c = 0; c < grad.W[l].cols(); ++c) CHECK(grad.W[l](r, c) == 0.0);
        for (int r = 0; r < grad.b[l].size(); ++r) CHECK(grad.b[l](r) == 0.0);
    }
}

TEST_CASE("rho head") {
    Tape tape;
    FieldSample rt{tape.leaf(0.0), tape.leaf(0.4), tape.leaf(-1.2)};
    FieldSample rho = rho_head(tape, rt);
    CHECK(tape.val(rho.value) == 1.0);
    CHECK(tape.val(rho.dt) == doctest::Approx(-0.4).epsilon(1e-15));
    CHECK(tape.val(rho.dx) == doctest::Approx(1.2).epsilon(1e-15));

    // positivity for very negative and very positive inputs
    Tape t2;
    FieldSample big = rho_head(t2, {t2.leaf(700.0), -1, -1});
    CHECK(t2.val(big.value) > 0.0);
    FieldSample small = rho_head(t2, {t2.leaf(-30.0), -1, -1});
    CHECK(t2.val(small.value) > 0.0);

    // derivative chain vs finite differences through exp(-x)
    const double x0 = 0.37, h = 1e-6;
    Tape t3;
    FieldSample s = rho_head(t3, {t3.leaf(x0), t3.leaf(1.0), -1});
    double fd = (std::exp(-(x0 + h)) - std::exp(-(x0 - h))) / (2.0 * h);
    CHECK(std::abs(t3.val(s.dt) - fd) < 1e-9);
}

TEST_CASE("g head: mass conservation and the spectral velocity derivative") {
    VelocityGrid grid = build_velocity_grid(8);
    std::mt19937_64 gen(17);

    // constant input collapses to (numerically) zero
    {
        Tape tape;
        std::vector<FieldSample> raw(8);
        for (int j = 0; j < 8; ++j) raw[j] = {tape.leaf(0.73), -1, -1};
        GHeadSample g = g_head(tape, raw, grid);
        for (int j = 0; j < 8; ++j) CHECK(std::abs(tape.val(g.psi[j].value)) < 1e-15);
    }

    // random input: discrete mean exactly zero (to roundoff)
    for (int trial = 0; trial < 20; ++trial) {
        Tape tape;
        std::vector<FieldSample> raw(8);
        for (int j = 0; j < 8; ++j) raw[j] = {tape.leaf(2.0 * u01(gen) - 1.0), -1, -1};
        GHeadSample g = g_head(tape, raw, grid);
        double mean = 0.0;
        for (int j = 0; j < 8; ++j) mean += tape.val(g.psi[j].value) * grid.weights[j];
        CHECK(std::abs(mean) < 1e-15);
    }

    // psi_tilde(v) = v: d_v g / M = 1 - 2 v^2 at the nodes
    {
        Tape tape;
        std::vector<FieldSample> raw(8);
        for (int j = 0; j < 8; ++j) raw[j] = {tape.leaf(grid.nodes[j]), -1, -1};
        GHeadSample g = g_head(tape, raw, grid);
        for (int j = 0; j < 8; ++j) {
            double expect = 1.0 - 2.0 * grid.nodes[j] * grid.nodes[j];
            CHECK(std::abs(tape.val(g.dv_g[j]) - expect) < 1e-10);
        }
    }
}

TEST_CASE("checkpoint round-trip") {
    Mlp net = xavier_init({2, 10, 1}, 99);
    save_checkpoint(net, "ckpt_test.txt");
    Mlp back = load_checkpoint("ckpt_test.txt");
    REQUIRE(back.widths == net.widths);
    std::vector<double> pa, pb;
    net.get_params(pa);
    back.get_params(pb);
    for (size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);
    std::remove("ckpt_test.txt");

    CHECK_THROWS_AS(load_checkpoint("no_such_ckpt.txt"), std::runtime_error);
}

TEST_CASE("tape basics and non-differentiable rejection") {
    Tape tape;
    int a = tape.leaf(3.0);
    int b = tape.leaf(-2.0);
    int c = tape.mul(tape.add(a, b), tape.exp_(a));   // (a+b) e^a
    std::vector<double> bar;
    tape.gradient(c, bar);
    CHECK(bar[a] == doctest::Approx(std::exp(3.0) + 1.0 * std::exp(3.0)).epsilon(1e-14));
    CHECK(bar[b] == doctest::Approx(std::exp(3.0)).epsilon(1e-14));

    int zero = tape.constant(0.0);
    CHECK_THROWS_AS(tape.div(a, zero), std::invalid_argument);
}
