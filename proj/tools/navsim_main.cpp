// Scenario runner. One subcommand per scenario; exit code 0 only when the
// scenario's success criteria hold.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "navsim/config.hpp"
#include "navsim/scenarios.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    double duration = -1.0;
    bool print_config = false;
};

int run_one(navsim::ScenarioName name, const CommonArgs& args) {
    using namespace navsim;
    try {
        std::optional<std::string> cfg_path;
        if (!args.config_path.empty()) {
            cfg_path = args.config_path;
        }
        ScenarioConfig cfg = make_config(name, cfg_path);
        if (args.seed_set) {
            cfg.seed = args.seed;
        }
        if (args.duration >= 0.0) {
            cfg.duration_s = args.duration;
        }
        if (!args.out_dir.empty()) {
            cfg.out_dir = args.out_dir;
        }
        if (args.print_config) {
            std::cout << default_config_json(name).dump(2) << "\n";
            return 0;
        }

        ScenarioResult result = run_scenario(cfg);
        result.metrics["scenario"] = scenario_name_string(name);
        result.metrics["success"] = result.success;

        if (!cfg.out_dir.empty()) {
            std::filesystem::create_directories(cfg.out_dir);
            const std::string base =
                cfg.out_dir + "/" + scenario_name_string(name);
            result.log.write_csv(base + "_log.csv");
            std::ofstream mf(base + "_metrics.json");
            mf << result.metrics.dump(2) << "\n";
            if (result.metrics.contains("plans")) {
                std::ofstream pf(base + "_plans.json");
                pf << result.metrics["plans"].dump(2) << "\n";
            }
        }

        std::cout << scenario_name_string(name) << ": " << result.summary
                  << (result.success ? " [ok]" : " [failed]") << "\n";
        return result.success ? 0 : 1;
    } catch (const navsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Indoor nano-drone localization and control simulator"};
    app.require_subcommand(1);

    CommonArgs args;
    int exit_code = 0;

    for (const std::string& name : navsim::all_scenario_names()) {
        CLI::App* sub = app.add_subcommand(name, "Run the " + name + " scenario");
        sub->add_option("--config", args.config_path, "JSON config overlay");
        sub->add_option("--out", args.out_dir, "Output directory for log/metrics");
        sub->add_option("--seed", args.seed, "Run seed")->each([&](const std::string&) {
            args.seed_set = true;
        });
        sub->add_option("--duration", args.duration, "Simulated duration in seconds");
        sub->add_flag("--print-config", args.print_config,
                      "Print the scenario's default config and exit");
        sub->callback([&args, name, &exit_code] {
            exit_code = run_one(navsim::parse_scenario_name(name), args);
        });
    }

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}
