#include "semikin/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace semikin {

RunConfig default_config() { return RunConfig{}; }

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config: key '" + key + "': " + why);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) bad(key, "not a number: '" + v + "'");
        return d;
    } catch (const std::invalid_argument&) {
        bad(key, "not a number: '" + v + "'");
    } catch (const std::out_of_range&) {
        bad(key, "out of range: '" + v + "'");
    }
}

long to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        long i = std::stol(v, &pos);
        if (pos != v.size()) bad(key, "not an integer: '" + v + "'");
        return i;
    } catch (const std::invalid_argument&) {
        bad(key, "not an integer: '" + v + "'");
    } catch (const std::out_of_range&) {
        bad(key, "out of range: '" + v + "'");
    }
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    ProblemConfig& p = cfg.problem;
    TrainConfig& t = cfg.train;
    if (key == "problem") {
        if (value == "semiconductor")
            p.kind = ProblemKind::Semiconductor;
        else if (value == "bp")
            p.kind = ProblemKind::Bp;
        else
            bad(key, "expected 'semiconductor' or 'bp', got '" + value + "'");
    } else if (key == "epsilon") {
        p.eps = to_double(key, value);
        if (p.eps < 0.0) bad(key, "must be nonnegative");
    } else if (key == "sigma") {
        p.sigma = to_double(key, value);
        if (p.sigma <= 0.0) bad(key, "must be positive");
    } else if (key == "kernel_csv") {
        p.kernel_csv = value;
    } else if (key == "x_lo") {
        p.x_lo = to_double(key, value);
    } else if (key == "x_hi") {
        p.x_hi = to_double(key, value);
    } else if (key == "t_final") {
        p.t_final = to_double(key, value);
        if (p.t_final <= 0.0) bad(key, "must be positive");
    } else if (key == "bp.beta") {
        p.beta = to_double(key, value);
        if (p.beta <= 0.0) bad(key, "must be positive");
    } else if (key == "bp.voltage") {
        p.voltage = to_double(key, value);
    } else if (key == "velocity.n_nodes") {
        p.n_nodes = (int)to_int(key, value);
        if (p.n_nodes <= 0) bad(key, "must be positive");
        if (p.order >= p.n_nodes) p.order = p.n_nodes - 1;
    } else if (key == "velocity.order") {
        p.order = (int)to_int(key, value);
    } else if (key == "solver.dx") {
        p.dx = to_double(key, value);
        if (p.dx <= 0.0) bad(key, "must be positive");
    } else if (key == "solver.dt") {
        p.dt = to_double(key, value);
        if (p.dt <= 0.0) bad(key, "must be positive");
    } else if (key == "solver.snapshot_stride") {
        p.snapshot_stride = (int)to_int(key, value);
    } else if (key == "colloc.nx") {
        p.colloc_nx = (int)to_int(key, value);
    } else if (key == "colloc.nt") {
        p.colloc_nt = (int)to_int(key, value);
    } else if (key == "seed") {
        p.seed = (uint64_t)to_int(key, value);
        t.seed = p.seed;
    } else if (key == "train.method") {
        if (value == "apnn")
            t.method = Method::Apnn;
        else if (value == "pinn")
            t.method = Method::Pinn;
        else
            bad(key, "expected 'apnn' or 'pinn', got '" + value + "'");
    } else if (key == "train.inverse") {
        if (value == "none")
            t.inverse = InverseMode::None;
        else if (value == "full")
            t.inverse = InverseMode::Full;
        else if (value == "partial")
            t.inverse = InverseMode::Partial;
        else
            bad(key, "expected 'none', 'full' or 'partial', got '" + value + "'");
    } else if (key == "train.epochs") {
        t.epochs = (int)to_int(key, value);
        if (t.epochs <= 0) bad(key, "must be positive");
    } else if (key == "train.lr") {
        t.lr = to_double(key, value);
        if (t.lr <= 0.0) bad(key, "must be positive");
    } else if (key == "train.hidden_layers") {
        t.hidden_layers = (int)to_int(key, value);
    } else if (key == "train.hidden_width") {
        t.hidden_width = (int)to_int(key, value);
    } else if (key == "train.phi_hidden_layers") {
        t.phi_hidden_layers = (int)to_int(key, value);
    } else if (key == "train.phi_hidden_width") {
        t.phi_hidden_width = (int)to_int(key, value);
    } else if (key == "train.sigma0") {
        t.sigma0 = to_double(key, value);
        if (t.sigma0 <= 0.0) bad(key, "must be positive");
    } else if (key == "train.lambda1") {
        t.weights.lambda1 = to_double(key, value);
    } else if (key == "train.lambda2") {
        t.weights.lambda2 = to_double(key, value);
    } else if (key == "train.w_rho") {
        t.weights.w_rho = to_double(key, value);
    } else if (key == "train.w_g") {
        t.weights.w_g = to_double(key, value);
    } else if (key == "train.w_f") {
        t.weights.w_f = to_double(key, value);
    } else if (key == "train.w_phi") {
        t.weights.w_phi = to_double(key, value);
    } else if (key == "train.w_poisson") {
        t.weights.w_poisson = to_double(key, value);
    } else if (key == "data.n_samples") {
        cfg.data_n = (int)to_int(key, value);
        if (cfg.data_n < 0) bad(key, "must be nonnegative");
    } else if (key == "data.seed") {
        cfg.data_seed = (uint64_t)to_int(key, value);
    } else if (key == "data.scenario") {
        if (value == "full")
            cfg.scenario = ObsScenario::Full;
        else if (value == "partial")
            cfg.scenario = ObsScenario::Partial;
        else
            bad(key, "expected 'full' or 'partial', got '" + value + "'");
    } else if (key == "out") {
        cfg.out_dir = value;
    } else {
        bad(key, "unknown key");
    }
}

RunConfig parse_config_file(const std::string& path) {
    RunConfig cfg = default_config();
    if (path.empty()) return cfg;
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("config: cannot open file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        ": expected 'key = value', got '" + s + "'");
        apply_override(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return cfg;
}

void write_config_echo(const RunConfig& cfg, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_config_echo: cannot open " + path);
    const ProblemConfig& p = cfg.problem;
    const TrainConfig& t = cfg.train;
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    f << "problem = " << (p.kind == ProblemKind::Bp ? "bp" : "semiconductor") << "\n";
    f << "epsilon = " << num(p.eps) << "\n";
    f << "sigma = " << num(p.sigma) << "\n";
    f << "kernel_csv = " << p.kernel_csv << "\n";
    f << "x_lo = " << num(p.x_lo) << "\n";
    f << "x_hi = " << num(p.x_hi) << "\n";
    f << "t_final = " << num(p.t_final) << "\n";
    f << "bp.beta = " << num(p.beta) << "\n";
    f << "bp.voltage = " << num(p.voltage) << "\n";
    f << "velocity.n_nodes = " << p.n_nodes << "\n";
    f << "velocity.order = " << p.order << "\n";
    f << "solver.dx = " << num(p.dx) << "\n";
    f << "solver.dt = " << num(p.dt) << "\n";
    f << "solver.snapshot_stride = " << p.snapshot_stride << "\n";
    f << "colloc.nx = " << p.colloc_nx << "\n";
    f << "colloc.nt = " << p.colloc_nt << "\n";
    f << "seed = " << p.seed << "\n";
    f << "train.method = " << (t.method == Method::Apnn ? "apnn" : "pinn") << "\n";
    f << "train.inverse = "
      << (t.inverse == InverseMode::None ? "none" : t.inverse == InverseMode::Full ? "full" : "partial")
      << "\n";
    f << "train.epochs = " << t.epochs << "\n";
    f << "train.lr = " << num(t.lr) << "\n";
    f << "train.hidden_layers = " << t.hidden_layers << "\n";
    f << "train.hidden_width = " << t.hidden_width << "\n";
    f << "train.phi_hidden_layers = " << t.phi_hidden_layers << "\n";
    f << "train.phi_hidden_width = " << t.phi_hidden_width << "\n";
    f << "train.sigma0 = " << num(t.sigma0) << "\n";
    f << "train.lambda1 = " << num(t.weights.lambda1) << "\n";
    f << "train.lambda2 = " << num(t.weights.lambda2) << "\n";
    f << "train.w_rho = " << num(t.weights.w_rho) << "\n";
    f << "train.w_g = " << num(t.weights.w_g) << "\n";
    f << "train.w_f = " << num(t.weights.w_f) << "\n";
    f << "train.w_phi = " << num(t.weights.w_phi) << "\n";
    f << "train.w_poisson = " << num(t.weights.w_poisson) << "\n";
    f << "data.n_samples = " << cfg.data_n << "\n";
    f << "data.seed = " << cfg.data_seed << "\n";
    f << "data.scenario = " << (cfg.scenario == ObsScenario::Full ? "full" : "partial") << "\n";
    f << "out = " << cfg.out_dir << "\n";
}

}  // namespace semikin
