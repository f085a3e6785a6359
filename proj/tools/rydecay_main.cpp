// Command-line front end. Precedence: built-in defaults < --config file <
// --set key=value < dedicated flags (--out, --seed, --threads).

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rydecay/commands.hpp"
#include "rydecay/config.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    int threads = 0;
    std::vector<std::string> sets;
    bool print_config = false;
};

void add_common(CLI::App* sub, CommonOptions& opt) {
    sub->add_option("--config", opt.config_path, "JSON config file or a previous run's manifest");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "master seed (trajectories)");
    sub->add_option("--threads", opt.threads, "worker threads for parameter sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--set", opt.sets, "override a config key, e.g. --set V=10 --set extents=[8]");
    sub->add_flag("--print-config", opt.print_config, "print the effective config and exit");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radiative decay in Rydberg lattice gases: single-atom versus neighborhood-resolved jump operators"};
    app.require_subcommand(1);
    CommonOptions opt;
    std::vector<std::pair<CLI::App*, rydecay::CommandResult (*)(const rydecay::RunConfig&)>> commands{
        {app.add_subcommand("coherence", "coherence decay |X(t)| for both decay models"), rydecay::cmd_coherence},
        {app.add_subcommand("steady-state", "exact stationary density over a (Delta, Omega) grid"),
         rydecay::cmd_steady_state},
        {app.add_subcommand("trajectories", "quantum-jump stationary density over a (Delta, Omega) grid"),
         rydecay::cmd_trajectories},
        {app.add_subcommand("meanfield", "mean-field bistability phase diagram"), rydecay::cmd_meanfield},
    };
    for (auto& [sub, fn] : commands) add_common(sub, opt);

    CLI11_PARSE(app, argc, argv);

    try {
        rydecay::RunConfig config;
        if (!opt.config_path.empty()) config = rydecay::load_config(opt.config_path, config);
        for (const auto& s : opt.sets) config = rydecay::merge_config(config, rydecay::parse_assignment(s));
        for (auto& [sub, fn] : commands) {
            if (!sub->parsed()) continue;
            if (sub->count("--out")) config.out = opt.out;
            if (sub->count("--seed")) config.seed = opt.seed;
            if (sub->count("--threads")) config.threads = opt.threads;
            config.validate();
            if (opt.print_config) {
                std::cout << nlohmann::json(config).dump(2) << '\n';
                return 0;
            }
            const auto result = fn(config);
            for (const auto& f : result.files) std::cout << f.string() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
