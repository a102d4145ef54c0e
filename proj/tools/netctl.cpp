// netctl: command-line front end for the network target-control toolkit.
//
// Recipes: netctl <recipe> --config cfg.json [--seed N] [--out DIR]
// Utilities: gen (network JSON export), gramian (W_C dump), plan (optimal input).
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "netctrl/experiments.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool energy_half = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON experiment config")->required();
    cmd->add_option("--seed", [&opts](const CLI::results_t& res) {
        opts.seed = std::stoull(res[0]);
        return true;
    }, "override the config seed");
    cmd->add_option("--out", [&opts](const CLI::results_t& res) {
        opts.out_dir = res[0];
        return true;
    }, "override the output directory");
    cmd->add_flag("--energy-half", opts.energy_half,
                  "report energies with the 1/2 factor of the variational form");
}

netctrl::ExperimentConfig load(const CommonOpts& opts, netctrl::RecipeKind kind) {
    auto cfg = netctrl::load_config(opts.config_path);
    cfg.recipe = kind;
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out_dir) cfg.out_dir = *opts.out_dir;
    if (opts.energy_half) cfg.energy_half = true;
    return cfg;
}

int run_kind(const CommonOpts& opts, netctrl::RecipeKind kind) {
    const auto cfg = load(opts, kind);
    const auto result = netctrl::run_recipe(cfg);
    for (const auto& f : result.files_written) std::cout << "wrote " << f << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimum-energy target control of networks"};
    app.require_subcommand(1);

    CommonOpts sphere_opts, demo_opts, sweep_opts, cmp_opts, tvf_opts, gen_opts, gram_opts,
        plan_opts;

    add_common(app.add_subcommand("sphere-distribution",
                                  "energy distribution over unit-sphere final states"),
               sphere_opts);
    add_common(app.add_subcommand("decomposition-demo",
                                  "controllable decomposition report and subspace check"),
               demo_opts);
    add_common(app.add_subcommand("bound-sweep", "exact and estimated energy bounds over tau_f"),
               sweep_opts);
    add_common(app.add_subcommand("driver-comparison",
                                  "upper-bound scaling under two driver choices"),
               cmp_opts);
    add_common(app.add_subcommand("target-vs-full",
                                  "energy of target control versus full control"),
               tvf_opts);
    add_common(app.add_subcommand("gen", "generate or load a network, export JSON"), gen_opts);
    add_common(app.add_subcommand("gramian", "dump W_C as CSV plus a JSON header"), gram_opts);
    add_common(app.add_subcommand("plan", "compute the optimal input plan, export CSV"),
               plan_opts);

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        using netctrl::RecipeKind;
        if (sub == "sphere-distribution") return run_kind(sphere_opts, RecipeKind::SphereDistribution);
        if (sub == "decomposition-demo") return run_kind(demo_opts, RecipeKind::DecompositionDemo);
        if (sub == "bound-sweep") return run_kind(sweep_opts, RecipeKind::BoundSweep);
        if (sub == "driver-comparison") return run_kind(cmp_opts, RecipeKind::DriverComparison);
        if (sub == "target-vs-full") return run_kind(tvf_opts, RecipeKind::TargetVsFull);

        if (sub == "gen") {
            const auto cfg = load(gen_opts, netctrl::RecipeKind::BoundSweep);
            const auto net = netctrl::resolve_network(cfg);
            std::filesystem::create_directories(cfg.out_dir);
            const auto path = (std::filesystem::path(cfg.out_dir) / "network.json").string();
            std::ofstream out(path);
            if (!out) throw netctrl::FormatError("cannot open " + path);
            out << netctrl::network_to_json(net) << "\n";
            std::cout << "wrote " << path << "\n";
            return 0;
        }
        if (sub == "gramian") {
            const auto cfg = load(gram_opts, netctrl::RecipeKind::BoundSweep);
            const auto net = netctrl::resolve_network(cfg);
            if (cfg.drivers.empty() || cfg.targets.empty())
                throw netctrl::ParameterError("gramian: drivers and targets are required");
            const auto B = netctrl::input_matrix(netctrl::DriverSet{cfg.drivers}, net.size());
            const auto bundle = netctrl::gramian_target(net.adjacency, B,
                                                        netctrl::TargetSet{cfg.targets},
                                                        cfg.tau_max);
            std::filesystem::create_directories(cfg.out_dir);
            const auto csv = (std::filesystem::path(cfg.out_dir) / "gramian.csv").string();
            const auto hdr = (std::filesystem::path(cfg.out_dir) / "gramian.json").string();
            netctrl::dump_gramian(bundle, csv, hdr);
            std::cout << "wrote " << csv << "\nwrote " << hdr << "\n";
            return 0;
        }
        if (sub == "plan") {
            const auto cfg = load(plan_opts, netctrl::RecipeKind::BoundSweep);
            const auto net = netctrl::resolve_network(cfg);
            if (cfg.drivers.empty() || cfg.targets.empty())
                throw netctrl::ParameterError("plan: drivers and targets are required");
            const int n = net.size();
            Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
            if (!cfg.x0.empty()) {
                if (static_cast<int>(cfg.x0.size()) != n)
                    throw netctrl::ParameterError("plan: x0 must have n entries");
                x0 = Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), n);
            }
            if (cfg.x_f.empty()) throw netctrl::ParameterError("plan: x_f is required");
            Eigen::VectorXd y_f(cfg.targets.size());
            for (std::size_t k = 0; k < cfg.targets.size(); ++k) {
                if (static_cast<int>(cfg.x_f.size()) == n)
                    y_f(k) = cfg.x_f[cfg.targets[k] - 1];
                else if (cfg.x_f.size() == cfg.targets.size())
                    y_f(k) = cfg.x_f[k];
                else
                    throw netctrl::ParameterError("plan: x_f must have n or r entries");
            }
            const auto B = netctrl::input_matrix(netctrl::DriverSet{cfg.drivers}, n);
            const auto convention = cfg.energy_half ? netctrl::EnergyConvention::HalfSum
                                                    : netctrl::EnergyConvention::Sum;
            const auto plan =
                netctrl::optimal_input(net.adjacency, B, netctrl::TargetSet{cfg.targets},
                                       {x0, y_f, cfg.tau_max}, convention);
            std::filesystem::create_directories(cfg.out_dir);
            const auto csv = (std::filesystem::path(cfg.out_dir) / "plan.csv").string();
            const auto js = (std::filesystem::path(cfg.out_dir) / "plan.json").string();
            netctrl::export_plan_csv(plan, csv);
            std::ofstream out(js);
            if (!out) throw netctrl::FormatError("cannot open " + js);
            out << netctrl::plan_summary_json(plan) << "\n";
            std::cout << "wrote " << csv << "\nwrote " << js << "\n";
            std::cout << "E = " << plan.energy << "\n";
            return 0;
        }
        std::cerr << "unknown subcommand\n";
        return 2;
    } catch (const netctrl::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const netctrl::FormatError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
