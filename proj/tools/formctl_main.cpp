#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "formctl/cli_io.hpp"

namespace {

formctl::ScenarioConfig resolve_scenario(const std::string& config_path,
                                         const std::string& preset) {
    if (!config_path.empty() && !preset.empty())
        throw formctl::ConfigError("--config and --preset are mutually exclusive");
    if (!config_path.empty()) return formctl::load_config(config_path);
    if (!preset.empty()) return formctl::preset_by_name(preset);
    throw formctl::ConfigError("one of --config or --preset is required");
}

formctl::GroupPartition parse_partition(const std::string& text) {
    formctl::GroupPartition partition;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int size = std::stoi(item, &used);
            if (used != item.size() || size <= 0) throw std::invalid_argument(item);
            partition.group_sizes.push_back(size);
        } catch (const std::exception&) {
            throw formctl::ConfigError("--partition: '" + item +
                                       "' is not a positive integer");
        }
    }
    partition.validate();
    return partition;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-group formation control simulator for differential-drive robots"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    std::string out_dir = "out";
    std::string partition_text;
    bool collision = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int audit_steps = 1000;

    auto* simulate = app.add_subcommand("simulate", "Run a closed-loop scenario");
    simulate->add_option("--config", config_path, "Scenario JSON file");
    simulate->add_option("--preset", preset, "Built-in scenario (paper_3x3, headon_2x2)");
    simulate->add_option("--out", out_dir, "Output directory")->capture_default_str();
    simulate->add_flag("--collision", collision, "Enable the collision-avoidance mode");
    simulate->add_option("--seed", seed, "Override the scenario seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });

    auto* transform = app.add_subcommand(
        "transform", "Print the shape-coordinate transform matrix as CSV");
    transform->add_option("--partition", partition_text, "Group sizes, e.g. 3,3,3")
        ->required();

    auto* audit = app.add_subcommand(
        "audit", "Integrate the physical and transformed domains side by side and "
                 "report the maximum deviation");
    audit->add_option("--config", config_path, "Scenario JSON file");
    audit->add_option("--preset", preset, "Built-in scenario (paper_3x3, headon_2x2)");
    audit->add_option("--steps", audit_steps, "Number of steps to audit")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? formctl::kExitOk : formctl::kExitConfig;
    }

    try {
        if (simulate->parsed()) {
            formctl::ScenarioConfig cfg = resolve_scenario(config_path, preset);
            if (collision) cfg.collision_enabled = true;
            if (seed_set) cfg.seed = seed;
            const formctl::SimResult result = formctl::run_scenario(cfg);
            const formctl::ConvergenceReport report =
                formctl::detect_convergence(result, cfg);
            formctl::write_outputs(result, report, cfg, out_dir);
            auto show = [](const char* name, const formctl::BlockTiming& bt) {
                if (bt.reach_time)
                    std::printf("%-9s reach %8.3f s (bound %8.3f s)\n", name,
                                *bt.reach_time, bt.bound);
                else
                    std::printf("%-9s reach     n/a   (bound %8.3f s)\n", name, bt.bound);
            };
            show("intra", report.intra);
            show("inter", report.inter);
            show("centroid", report.centroid);
            std::printf("min pairwise distance %.4f m\n", report.min_distance);
            std::printf("outputs written to %s\n", out_dir.c_str());
        } else if (transform->parsed()) {
            const formctl::CbtTransform tf(parse_partition(partition_text));
            const Eigen::MatrixXd& phi = tf.coefficients();
            for (Eigen::Index i = 0; i < phi.rows(); ++i) {
                for (Eigen::Index j = 0; j < phi.cols(); ++j)
                    std::printf(j ? ",%.12g" : "%.12g", phi(i, j));
                std::printf("\n");
            }
        } else if (audit->parsed()) {
            const formctl::ScenarioConfig cfg = resolve_scenario(config_path, preset);
            const double deviation = formctl::domain_equivalence_audit(cfg, audit_steps);
            std::printf("max domain deviation over %d steps: %.3e\n", audit_steps,
                        deviation);
        }
    } catch (const formctl::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return formctl::kExitConfig;
    } catch (const formctl::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return formctl::kExitNumerical;
    } catch (const formctl::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return formctl::kExitIo;
    }
    return formctl::kExitOk;
}
