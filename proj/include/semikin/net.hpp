#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "semikin/hermite.hpp"
#include "semikin/tape.hpp"

namespace semikin {

/// Fully-connected network, tanh hidden layers, identity output.
struct Mlp {
    std::vector<int> widths;
    std::vector<Eigen::MatrixXd> W;   // W[l]: widths[l+1] x widths[l]
    std::vector<Eigen::VectorXd> b;

    int n_layers() const { return (int)W.size(); }
    int in_dim() const { return widths.front(); }
    int out_dim() const { return widths.back(); }
    int n_params() const;
    void get_params(std::vector<double>& out) const;
    void set_params(const std::vector<double>& p);
};

/// Weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero.  The draw
/// order and the bits-to-double mapping are fixed, so one seed gives one
/// network bit-for-bit.
Mlp xavier_init(const std::vector<int>& widths, uint64_t seed);

void save_checkpoint(const Mlp& net, const std::string& path);
Mlp load_checkpoint(const std::string& path);

struct DiffValue {
    double value = 0.0;
    std::vector<double> input_grads;
};

/// Single-sample evaluation with exact derivatives w.r.t. every input.
std::vector<DiffValue> forward(const Mlp& net, const std::vector<double>& inputs);

/// Batched outputs of one evaluation: values and the requested input
/// tangents, each out_dim x n.
struct BatchOutput {
    Eigen::MatrixXd value;
    std::vector<Eigen::MatrixXd> tangent;   // one per requested input dim
};

/// Parameter gradient accumulator matching the Mlp layout.
struct ParamGrad {
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;
    void init(const Mlp& net);
    void zero();
    void flatten(std::vector<double>& out) const;
};

/// Forward pass with tangent propagation, keeping the per-layer activations
/// and tangents so the adjoint pass reuses them.  Buffers persist across
/// calls of identical shape (no steady-state allocation in training loops).
class MlpTrace {
  public:
    /// Values and the requested input tangents for every column of X.
    void forward(const Mlp& net, const Eigen::MatrixXd& X, const std::vector<int>& tangent_dims);

    const Eigen::MatrixXd& value() const { return A_.back(); }
    const Eigen::MatrixXd& tangent(int d) const { return T_[d].back(); }

    /// Accumulates into `grad` the exact parameter gradient of any scalar
    /// whose sensitivities to the outputs are `val_bar` / `tan_bar` (same
    /// shapes as value()/tangent()).  Handles scalars containing
    /// input-derivatives of outputs (gradient-of-derivative).
    void backward(const Eigen::MatrixXd& val_bar, const std::vector<Eigen::MatrixXd>& tan_bar,
                  ParamGrad& grad);

  private:
    const Mlp* net_ = nullptr;
    std::vector<int> tdims_;
    std::vector<Eigen::MatrixXd> A_;
    std::vector<std::vector<Eigen::MatrixXd>> T_;   // T_[d][layer]
    // adjoint workspaces
    Eigen::MatrixXd Zbar_, Abar_, U_;
    Eigen::ArrayXXd Zbar_el_;
    std::vector<Eigen::MatrixXd> Tbar_, Ubar_;
};

/// One-shot convenience wrappers over MlpTrace.
BatchOutput batch_eval(const Mlp& net, const Eigen::MatrixXd& X, const std::vector<int>& tangent_dims);
void batch_grad(const Mlp& net, const Eigen::MatrixXd& X, const std::vector<int>& tangent_dims,
                const Eigen::MatrixXd& val_bar, const std::vector<Eigen::MatrixXd>& tan_bar,
                ParamGrad& grad);

/// Tape handles of one scalar field sample and its first derivatives.
struct FieldSample {
    int value = -1;
    int dt = -1;
    int dx = -1;
};

/// Positive density head rho = exp(-rho_tilde), derivatives propagated.
FieldSample rho_head(Tape& tape, const FieldSample& rho_tilde);

/// Mass-conserving micro head for one (t, x): psi = psi_tilde - <psi_tilde>_w
/// across the velocity nodes, plus d_v g / M assembled spectrally as
/// C psi - 2 v psi + 2 v <psi>_w.
struct GHeadSample {
    std::vector<FieldSample> psi;   // per velocity node
    std::vector<int> dv_g;          // tape ids of (d_v g)/M per node
    int mean = -1;                  // <psi>_w after subtraction
};
GHeadSample g_head(Tape& tape, const std::vector<FieldSample>& psi_tilde, const VelocityGrid& grid);

}  // namespace semikin
