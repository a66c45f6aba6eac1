#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semikin/losses.hpp"
#include "semikin/net.hpp"
#include "semikin/problems.hpp"
#include "semikin/refsolver.hpp"

namespace semikin {

enum class Method { Pinn, Apnn };
enum class InverseMode { None, Full, Partial };

struct TrainConfig {
    Method method = Method::Apnn;
    InverseMode inverse = InverseMode::None;
    int epochs = 10000;
    double lr = 1e-3;
    uint64_t seed = 0;
    int hidden_layers = 4;
    int hidden_width = 128;
    int phi_hidden_layers = 14;
    int phi_hidden_width = 128;
    double sigma0 = 0.5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    LossWeights weights;
    double divergence_abort = 1e6;
    double validation_fraction = 0.2;
};

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
    void init(size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
        t = 0;
    }
};

/// Bias-corrected Adam update; aborts on non-finite gradients.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const TrainConfig& cfg);

struct HistoryRow {
    double total = 0, ge_macro = 0, ge_micro = 0, bc = 0, ic = 0, data = 0, poisson = 0;
};

struct TrainReport {
    std::vector<HistoryRow> history;        // one row per epoch
    std::vector<double> sigma_history;      // inverse runs
    double final_error = 0.0;               // relative l2 of rho at t_final vs reference
    double final_error_phi = 0.0;           // BP runs
    double sigma_hat = 0.0;
    double val_data_loss = 0.0;
    double wall_s = 0.0;
    uint64_t seed = 0;
    int epochs = 0;

    // rho (and phi for BP) on the reference grid at t_final, for plotting
    std::vector<double> rho_final;
    std::vector<double> phi_final;
};

TrainReport train_forward(const Problem& prob, const TrainConfig& cfg, const Trajectory& reference);

TrainReport train_inverse(const Problem& prob, const TrainConfig& cfg, const Observations& data,
                          const Trajectory& reference);

/// sqrt( sum |pred - ref|^2 / sum |ref|^2 ) at the snapshot closest to t.
double relative_l2_error(const std::vector<double>& pred, const std::vector<double>& ref);
double relative_l2_error(const Trajectory& pred, const Trajectory& ref, double t);

void write_loss_history_csv(const TrainReport& report, const std::string& path);
void write_sigma_history_csv(const TrainReport& report, const std::string& path);
void write_metrics(const TrainReport& report, const std::string& path);

}  // namespace semikin
