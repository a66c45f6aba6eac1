#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "semikin/config.hpp"
#include "semikin/experiments.hpp"
#include "semikin/svg.hpp"

namespace fs = std::filesystem;
using namespace semikin;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
    double epsilon = -1.0;
    long seed = -1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (flat key = value)");
        cmd->add_option("--set", sets, "override a config key, e.g. --set epsilon=1e-8")
            ->type_name("KEY=VALUE");
        cmd->add_option("--out", out, "output directory");
        cmd->add_option("--epsilon", epsilon, "shorthand for --set epsilon=...");
        cmd->add_option("--seed", seed, "shorthand for --set seed=...");
    }

    std::vector<std::pair<std::string, std::string>> overrides() const {
        std::vector<std::pair<std::string, std::string>> o;
        for (const std::string& s : sets) {
            size_t eq = s.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("--set expects KEY=VALUE, got '" + s + "'");
            o.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
        char buf[32];
        if (epsilon >= 0.0) {
            std::snprintf(buf, sizeof(buf), "%.17g", epsilon);
            o.emplace_back("epsilon", buf);
        }
        if (seed >= 0) o.emplace_back("seed", std::to_string(seed));
        if (!out.empty()) o.emplace_back("out", out);
        return o;
    }

    RunConfig resolve() const {
        RunConfig cfg = parse_config_file(config_path);
        for (const auto& [k, v] : overrides()) apply_override(cfg, k, v);
        return cfg;
    }
};

void emit_run_preamble(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    write_config_echo(cfg, cfg.out_dir + "/config_echo.txt");
    std::ofstream(cfg.out_dir + "/VERSION") << "semikin 1.0\n";
}

int cmd_solve_ref(const CommonArgs& args) {
    RunConfig cfg = args.resolve();
    emit_run_preamble(cfg);
    Problem prob = make_problem(cfg.problem);
    Trajectory traj = reference_trajectory(prob);
    write_trajectory_csv(traj, cfg.out_dir + "/trajectory.csv");
    write_psi_csv(traj, prob.grid, cfg.out_dir + "/psi.csv");
    std::cout << "wrote " << cfg.out_dir << "/trajectory.csv (" << traj.n_snapshots() << " snapshots)\n";
    return 0;
}

int cmd_solve_limit(const CommonArgs& args) {
    RunConfig cfg = args.resolve();
    emit_run_preamble(cfg);
    Problem prob = make_problem(cfg.problem);
    Trajectory traj = limit_trajectory(prob);
    write_trajectory_csv(traj, cfg.out_dir + "/trajectory.csv");
    std::cout << "wrote " << cfg.out_dir << "/trajectory.csv (" << traj.n_snapshots() << " snapshots)\n";
    return 0;
}

int cmd_gen_data(const CommonArgs& args, const std::string& from) {
    RunConfig cfg = args.resolve();
    emit_run_preamble(cfg);
    Problem prob = make_problem(cfg.problem);
    Trajectory traj = from.empty()
                          ? reference_trajectory(prob)
                          : read_trajectory_csv(from + "/trajectory.csv", from + "/psi.csv", prob.grid);
    Observations obs =
        generate_observations(traj, prob.grid, cfg.scenario, cfg.data_n, cfg.data_seed, cfg.problem.eps);
    sort_observations(obs);
    write_observations(obs, cfg.out_dir + "/data");
    std::cout << "wrote " << cfg.out_dir << "/data (" << obs.rho.size() << " rho samples)\n";
    return 0;
}

int cmd_train(const CommonArgs& args) {
    RunConfig cfg = args.resolve();
    emit_run_preamble(cfg);
    Problem prob = make_problem(cfg.problem);
    Trajectory ref = reference_trajectory(prob);
    TrainReport rep;
    if (cfg.train.inverse == InverseMode::None) {
        rep = train_forward(prob, cfg.train, ref);
    } else {
        Observations obs = generate_observations(ref, prob.grid, cfg.scenario, cfg.data_n, cfg.data_seed,
                                                 cfg.problem.eps);
        sort_observations(obs);
        write_observations(obs, cfg.out_dir + "/data");
        rep = train_inverse(prob, cfg.train, obs, ref);
    }
    write_metrics(rep, cfg.out_dir + "/metrics.txt");
    write_loss_history_csv(rep, cfg.out_dir + "/loss_history.csv");
    if (!rep.sigma_history.empty()) write_sigma_history_csv(rep, cfg.out_dir + "/sigma_history.csv");
    std::ofstream(cfg.out_dir + "/timing.txt") << "wall_s = " << rep.wall_s << "\n";
    {
        const auto& ref_rho = ref.rho.back().values;
        std::ofstream f(cfg.out_dir + "/rho_final.csv", std::ios::binary);
        f << "x,rho_pred,rho_ref\n";
        char buf[96];
        for (size_t i = 0; i < rep.rho_final.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", ref.x((int)i), rep.rho_final[i],
                          ref_rho[i]);
            f << buf;
        }
    }
    std::cout << "final_error = " << rep.final_error;
    if (cfg.train.inverse != InverseMode::None) std::cout << "  sigma_hat = " << rep.sigma_hat;
    std::cout << "\n";
    return 0;
}

int cmd_experiment(const std::string& name, const CommonArgs& args, const std::string& seed_list,
                   bool no_svg) {
    std::vector<uint64_t> seeds;
    if (!seed_list.empty()) {
        std::stringstream ss(seed_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
    }
    run_experiment(name, args.config_path, args.overrides(), seeds, !no_svg);
    std::cout << "experiment '" << name << "' complete\n";
    return 0;
}

int cmd_compare(const std::string& a, const std::string& b, double t) {
    VelocityGrid grid = build_velocity_grid(8);
    Trajectory ta = read_trajectory_csv(a, "", grid);
    Trajectory tb = read_trajectory_csv(b, "", grid);
    double when = t >= 0.0 ? t : tb.times.back();
    double err = relative_l2_error(ta, tb, when);
    std::cout << "relative_l2(t=" << when << ") = " << err << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semiconductor kinetic workbench: AP reference solver, drift-diffusion limit, "
                 "and PINN/APNN residual training"};
    app.require_subcommand(1);

    CommonArgs ref_args, limit_args, gen_args, train_args, exp_args;
    std::string gen_from, exp_name, exp_seeds, cmp_a, cmp_b;
    double cmp_t = -1.0;
    bool no_svg = false;

    auto* c_ref = app.add_subcommand("solve-ref", "run the kinetic reference solver");
    ref_args.attach(c_ref);
    auto* c_lim = app.add_subcommand("solve-limit", "run the drift-diffusion limit solver");
    limit_args.attach(c_lim);
    auto* c_gen = app.add_subcommand("gen-data", "generate synthetic observation data");
    gen_args.attach(c_gen);
    c_gen->add_option("--from", gen_from, "read an existing solve-ref output directory");
    auto* c_train = app.add_subcommand("train", "train a PINN or APNN model");
    train_args.attach(c_train);
    auto* c_exp = app.add_subcommand("experiment", "run a named experiment pipeline");
    c_exp->add_option("name", exp_name, "one of: table1, bp_forward, inverse_full, inverse_partial, ap_sweep")
        ->required();
    exp_args.attach(c_exp);
    c_exp->add_option("--seeds", exp_seeds, "comma-separated training seeds");
    c_exp->add_flag("--no-svg", no_svg, "skip SVG plot emission");
    auto* c_cmp = app.add_subcommand("compare", "relative l2 distance between two trajectory CSVs");
    c_cmp->add_option("a", cmp_a)->required();
    c_cmp->add_option("b", cmp_b)->required();
    c_cmp->add_option("--t", cmp_t, "time of comparison (default: final)");

    try {
        app.parse(argc, argv);
        if (*c_ref) return cmd_solve_ref(ref_args);
        if (*c_lim) return cmd_solve_limit(limit_args);
        if (*c_gen) return cmd_gen_data(gen_args, gen_from);
        if (*c_train) return cmd_train(train_args);
        if (*c_exp) return cmd_experiment(exp_name, exp_args, exp_seeds, no_svg);
        if (*c_cmp) return cmd_compare(cmp_a, cmp_b, cmp_t);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
