#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace semikin {

/// Reverse-mode scalar tape used to assemble loss functions from network
/// outputs (values and input-derivatives enter as leaves).  Values are
/// computed eagerly; gradient() runs one reverse sweep.  Lin/Sum reductions
/// use compensated accumulation so reported losses are stable under
/// permutation of their terms.
class Tape {
  public:
    enum class Op : uint8_t {
        Leaf, Const, Add, Sub, Mul, Div, Neg, Exp, Tanh, Square, Scale, AddConst, Lin
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        double val = 0.0;
        double aux = 0.0;
        int args_off = 0;
        int args_len = 0;
    };

    int leaf(double v) { return push({Op::Leaf, -1, -1, v}); }
    int constant(double v) { return push({Op::Const, -1, -1, v}); }

    int add(int a, int b) { return push({Op::Add, a, b, val(a) + val(b)}); }
    int sub(int a, int b) { return push({Op::Sub, a, b, val(a) - val(b)}); }
    int mul(int a, int b) { return push({Op::Mul, a, b, val(a) * val(b)}); }
    int div(int a, int b) {
        if (val(b) == 0.0) throw std::invalid_argument("Tape: division by zero");
        return push({Op::Div, a, b, val(a) / val(b)});
    }
    int neg(int a) { return push({Op::Neg, a, -1, -val(a)}); }
    int exp_(int a) { return push({Op::Exp, a, -1, std::exp(val(a))}); }
    int tanh_(int a) { return push({Op::Tanh, a, -1, std::tanh(val(a))}); }
    int square(int a) { return push({Op::Square, a, -1, val(a) * val(a)}); }
    int scale(int a, double c) { return push({Op::Scale, a, -1, c * val(a), c}); }
    int add_const(int a, double c) { return push({Op::AddConst, a, -1, val(a) + c, c}); }

    /// Compensated sum of coeffs[k] * ids[k].
    int lin(const std::vector<int>& ids, const std::vector<double>& coeffs) {
        if (ids.size() != coeffs.size()) throw std::invalid_argument("Tape::lin: size mismatch");
        double s = 0.0, comp = 0.0;
        for (size_t k = 0; k < ids.size(); ++k) {
            double term = coeffs[k] * val(ids[k]) - comp;
            double t = s + term;
            comp = (t - s) - term;
            s = t;
        }
        Node n{Op::Lin, -1, -1, s};
        n.args_off = (int)arg_ids_.size();
        n.args_len = (int)ids.size();
        arg_ids_.insert(arg_ids_.end(), ids.begin(), ids.end());
        arg_coeffs_.insert(arg_coeffs_.end(), coeffs.begin(), coeffs.end());
        return push(n);
    }
    int sum(const std::vector<int>& ids) { return lin(ids, std::vector<double>(ids.size(), 1.0)); }

    double val(int id) const { return nodes_[id].val; }
    size_t size() const { return nodes_.size(); }

    /// d(root)/d(node) for every node, by one reverse sweep.
    void gradient(int root, std::vector<double>& bar) const {
        bar.assign(nodes_.size(), 0.0);
        bar[root] = 1.0;
        for (int i = (int)nodes_.size() - 1; i >= 0; --i) {
            const Node& n = nodes_[i];
            const double g = bar[i];
            if (g == 0.0) continue;
            switch (n.op) {
                case Op::Leaf:
                case Op::Const: break;
                case Op::Add: bar[n.a] += g; bar[n.b] += g; break;
                case Op::Sub: bar[n.a] += g; bar[n.b] -= g; break;
                case Op::Mul: bar[n.a] += g * nodes_[n.b].val; bar[n.b] += g * nodes_[n.a].val; break;
                case Op::Div: {
                    const double bv = nodes_[n.b].val;
                    bar[n.a] += g / bv;
                    bar[n.b] -= g * nodes_[n.a].val / (bv * bv);
                    break;
                }
                case Op::Neg: bar[n.a] -= g; break;
                case Op::Exp: bar[n.a] += g * n.val; break;
                case Op::Tanh: bar[n.a] += g * (1.0 - n.val * n.val); break;
                case Op::Square: bar[n.a] += 2.0 * g * nodes_[n.a].val; break;
                case Op::Scale: bar[n.a] += g * n.aux; break;
                case Op::AddConst: bar[n.a] += g; break;
                case Op::Lin:
                    for (int k = 0; k < n.args_len; ++k)
                        bar[arg_ids_[n.args_off + k]] += g * arg_coeffs_[n.args_off + k];
                    break;
            }
        }
    }

    void clear() {
        nodes_.clear();
        arg_ids_.clear();
        arg_coeffs_.clear();
    }

  private:
    int push(Node n) {
        nodes_.push_back(n);
        return (int)nodes_.size() - 1;
    }
    std::vector<Node> nodes_;
    std::vector<int> arg_ids_;
    std::vector<double> arg_coeffs_;
};

}  // namespace semikin
