#include "semikin/net.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace semikin {

namespace {

double u01(std::mt19937_64& gen) {
    // 53-bit mantissa draw; avoids distribution-object portability gaps.
    return (gen() >> 11) * 0x1.0p-53;
}
}  // namespace

int Mlp::n_params() const {
    int n = 0;
    for (int l = 0; l < n_layers(); ++l) n += (int)(W[l].size() + b[l].size());
    return n;
}

void Mlp::get_params(std::vector<double>& out) const {
    out.clear();
    out.reserve(n_params());
    for (int l = 0; l < n_layers(); ++l) {
        for (int r = 0; r < W[l].rows(); ++r)
            for (int c = 0; c < W[l].cols(); ++c) out.push_back(W[l](r, c));
        for (int r = 0; r < b[l].size(); ++r) out.push_back(b[l](r));
    }
}

void Mlp::set_params(const std::vector<double>& p) {
    if ((int)p.size() != n_params()) throw std::invalid_argument("Mlp::set_params: size mismatch");
    size_t k = 0;
    for (int l = 0; l < n_layers(); ++l) {
        for (int r = 0; r < W[l].rows(); ++r)
            for (int c = 0; c < W[l].cols(); ++c) W[l](r, c) = p[k++];
        for (int r = 0; r < b[l].size(); ++r) b[l](r) = p[k++];
    }
}

Mlp xavier_init(const std::vector<int>& widths, uint64_t seed) {
    if (widths.size() < 2) throw std::invalid_argument("xavier_init: need at least input and output widths");
    for (int w : widths)
        if (w <= 0) throw std::invalid_argument("xavier_init: widths must be positive");
    Mlp net;
    net.widths = widths;
    std::mt19937_64 gen(seed);
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        const int fan_in = widths[l], fan_out = widths[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd W(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) W(r, c) = bound * (2.0 * u01(gen) - 1.0);
        net.W.push_back(std::move(W));
        net.b.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
}

void save_checkpoint(const Mlp& net, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
    f << "semikin-mlp 1\n";
    for (size_t i = 0; i < net.widths.size(); ++i) f << (i ? " " : "") << net.widths[i];
    f << "\n";
    std::vector<double> p;
    net.get_params(p);
    char buf[32];
    for (double v : p) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", v);
        f << buf;
    }
}

Mlp load_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::string tag;
    int version = 0;
    f >> tag >> version;
    if (tag != "semikin-mlp" || version != 1)
        throw std::runtime_error("load_checkpoint: unrecognized checkpoint format in " + path);
    f.ignore();
    std::string line;
    std::getline(f, line);
    std::istringstream ws(line);
    std::vector<int> widths;
    int w;
    while (ws >> w) widths.push_back(w);
    Mlp net = xavier_init(widths, 0);
    std::vector<double> p(net.n_params());
    for (double& v : p)
        if (!(f >> v)) throw std::runtime_error("load_checkpoint: truncated parameter list in " + path);
    net.set_params(p);
    return net;
}

void ParamGrad::init(const Mlp& net) {
    W.clear();
    b.clear();
    for (int l = 0; l < net.n_layers(); ++l) {
        W.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
        b.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    }
}

void ParamGrad::zero() {
    for (auto& m : W) m.setZero();
    for (auto& v : b) v.setZero();
}

void ParamGrad::flatten(std::vector<double>& out) const {
    out.clear();
    for (size_t l = 0; l < W.size(); ++l) {
        for (int r = 0; r < W[l].rows(); ++r)
            for (int c = 0; c < W[l].cols(); ++c) out.push_back(W[l](r, c));
        for (int r = 0; r < b[l].size(); ++r) out.push_back(b[l](r));
    }
}

void MlpTrace::forward(const Mlp& net, const Eigen::MatrixXd& X, const std::vector<int>& tangent_dims) {
    if ((int)X.rows() != net.in_dim()) throw std::invalid_argument("MlpTrace: input dim mismatch");
    for (int d : tangent_dims)
        if (d < 0 || d >= net.in_dim()) throw std::invalid_argument("MlpTrace: bad tangent dim");
    net_ = &net;
    tdims_ = tangent_dims;
    const int L = net.n_layers();
    const int n = (int)X.cols();
    A_.resize(L + 1);
    T_.resize(tdims_.size());
    A_[0] = X;
    for (size_t d = 0; d < tdims_.size(); ++d) {
        T_[d].resize(L + 1);
        T_[d][0].setZero(net.in_dim(), n);
        T_[d][0].row(tdims_[d]).setOnes();
    }
    for (int l = 0; l < L; ++l) {
        Eigen::MatrixXd& A = A_[l + 1];
        A.resize(net.W[l].rows(), n);
        A.noalias() = net.W[l] * A_[l];
        A.colwise() += net.b[l];
        if (l < L - 1) {
            // tanh via the vectorized exp: 1 - 2/(e^{2z}+1), exact at +-inf
            A = 1.0 - 2.0 / ((2.0 * A.array()).exp() + 1.0);
            for (size_t d = 0; d < tdims_.size(); ++d) {
                Eigen::MatrixXd& T = T_[d][l + 1];
                T.resize(A.rows(), n);
                T.noalias() = net.W[l] * T_[d][l];
                T.array() *= 1.0 - A.array().square();
            }
        } else {
            for (size_t d = 0; d < tdims_.size(); ++d) {
                Eigen::MatrixXd& T = T_[d][l + 1];
                T.resize(A.rows(), n);
                T.noalias() = net.W[l] * T_[d][l];
            }
        }
    }
}

void MlpTrace::backward(const Eigen::MatrixXd& val_bar, const std::vector<Eigen::MatrixXd>& tan_bar,
                        ParamGrad& grad) {
    if (!net_) throw std::logic_error("MlpTrace::backward before forward");
    if (tan_bar.size() != tdims_.size())
        throw std::invalid_argument("MlpTrace::backward: tangent bar count mismatch");
    const Mlp& net = *net_;
    const int L = net.n_layers();
    const size_t D = tdims_.size();
    Abar_ = val_bar;
    Tbar_.resize(D);
    Ubar_.resize(D);
    for (size_t d = 0; d < D; ++d) Tbar_[d] = tan_bar[d];

    for (int l = L - 1; l >= 0; --l) {
        if (l == L - 1) {
            Zbar_ = Abar_;
            for (size_t d = 0; d < D; ++d) Ubar_[d] = Tbar_[d];
        } else {
            const auto& A = A_[l + 1];
            Zbar_el_ = (1.0 - A.array().square());   // sigma'
            Zbar_ = (Zbar_el_ * Abar_.array()).matrix();
            for (size_t d = 0; d < D; ++d) {
                // T = sigma'(Z) .* U with U = W T_prev; d sigma'/d z = -2 A sigma'
                U_.resize(A.rows(), A.cols());
                U_.noalias() = net.W[l] * T_[d][l];
                Zbar_.array() += (-2.0 * A.array() * Zbar_el_) * U_.array() * Tbar_[d].array();
                Ubar_[d] = (Zbar_el_ * Tbar_[d].array()).matrix();
            }
        }
        grad.W[l].noalias() += Zbar_ * A_[l].transpose();
        grad.b[l] += Zbar_.rowwise().sum();
        Abar_.resize(net.W[l].cols(), Zbar_.cols());
        Abar_.noalias() = net.W[l].transpose() * Zbar_;
        for (size_t d = 0; d < D; ++d) {
            grad.W[l].noalias() += Ubar_[d] * T_[d][l].transpose();
            Tbar_[d].resize(net.W[l].cols(), Ubar_[d].cols());
            Tbar_[d].noalias() = net.W[l].transpose() * Ubar_[d];
        }
    }
}

BatchOutput batch_eval(const Mlp& net, const Eigen::MatrixXd& X, const std::vector<int>& tangent_dims) {
    MlpTrace tr;
    tr.forward(net, X, tangent_dims);
    BatchOutput out;
    out.value = tr.value();
    out.tangent.resize(tangent_dims.size());
    for (size_t d = 0; d < tangent_dims.size(); ++d) out.tangent[d] = tr.tangent((int)d);
    return out;
}

void batch_grad(const Mlp& net, const Eigen::MatrixXd& X, const std::vector<int>& tangent_dims,
                const Eigen::MatrixXd& val_bar, const std::vector<Eigen::MatrixXd>& tan_bar,
                ParamGrad& grad) {
    MlpTrace tr;
    tr.forward(net, X, tangent_dims);
    tr.backward(val_bar, tan_bar, grad);
}

std::vector<DiffValue> forward(const Mlp& net, const std::vector<double>& inputs) {
    if ((int)inputs.size() != net.in_dim()) throw std::invalid_argument("forward: input dim mismatch");
    Eigen::MatrixXd X(net.in_dim(), 1);
    for (int i = 0; i < net.in_dim(); ++i) X(i, 0) = inputs[i];
    std::vector<int> dims(net.in_dim());
    for (int i = 0; i < net.in_dim(); ++i) dims[i] = i;
    BatchOutput out = batch_eval(net, X, dims);
    std::vector<DiffValue> res(net.out_dim());
    for (int o = 0; o < net.out_dim(); ++o) {
        res[o].value = out.value(o, 0);
        res[o].input_grads.resize(net.in_dim());
        for (int i = 0; i < net.in_dim(); ++i) res[o].input_grads[i] = out.tangent[i](o, 0);
    }
    return res;
}

FieldSample rho_head(Tape& tape, const FieldSample& rho_tilde) {
    FieldSample out;
    out.value = tape.exp_(tape.neg(rho_tilde.value));
    if (rho_tilde.dt >= 0) out.dt = tape.neg(tape.mul(out.value, rho_tilde.dt));
    if (rho_tilde.dx >= 0) out.dx = tape.neg(tape.mul(out.value, rho_tilde.dx));
    return out;
}

GHeadSample g_head(Tape& tape, const std::vector<FieldSample>& psi_tilde, const VelocityGrid& grid) {
    const int n = grid.n_nodes;
    if ((int)psi_tilde.size() != n) throw std::invalid_argument("g_head: node count mismatch");
    GHeadSample out;
    out.psi.resize(n);

    std::vector<int> vals(n), dts(n), dxs(n);
    bool has_dt = psi_tilde[0].dt >= 0, has_dx = psi_tilde[0].dx >= 0;
    for (int j = 0; j < n; ++j) {
        vals[j] = psi_tilde[j].value;
        if (has_dt) dts[j] = psi_tilde[j].dt;
        if (has_dx) dxs[j] = psi_tilde[j].dx;
    }
    int mval = tape.lin(vals, grid.weights);
    int mdt = has_dt ? tape.lin(dts, grid.weights) : -1;
    int mdx = has_dx ? tape.lin(dxs, grid.weights) : -1;
    for (int j = 0; j < n; ++j) {
        out.psi[j].value = tape.sub(vals[j], mval);
        if (has_dt) out.psi[j].dt = tape.sub(dts[j], mdt);
        if (has_dx) out.psi[j].dx = tape.sub(dxs[j], mdx);
    }

    std::vector<int> psis(n);
    for (int j = 0; j < n; ++j) psis[j] = out.psi[j].value;
    out.mean = tape.lin(psis, grid.weights);

    out.dv_g.resize(n);
    std::vector<double> crow(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) crow[j] = grid.d(i, j);
        int cpsi = tape.lin(psis, crow);
        const double v2 = 2.0 * grid.nodes[i];
        out.dv_g[i] = tape.add(tape.sub(cpsi, tape.scale(psis[i], v2)), tape.scale(out.mean, v2));
    }
    return out;
}

}  // namespace semikin
