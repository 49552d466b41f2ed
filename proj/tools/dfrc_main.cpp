#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dfrc/harness.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Dual-functional radar-communication experiment runner"};
    app.set_version_flag("--version", std::string("dfrc ") + DFRC_VERSION);

    std::string kind;
    dfrc::ExperimentSpec spec;
    std::uint64_t seed = 0;
    std::vector<std::string> sweeps;

    std::vector<std::string> kinds(std::begin(dfrc::kExperimentKinds), std::end(dfrc::kExperimentKinds));
    app.add_option("kind", kind, "Experiment kind")->required()->check(CLI::IsMember(kinds));
    app.add_option("--config", spec.config_path, "JSON config file")->required();
    app.add_option("--out", spec.out_path, "Output CSV path")->required();
    auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--sweep", sweeps, "key=start:stop:step (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : dfrc::kExitInvalidConfig;
    }

    spec.kind = kind;
    if (*seed_opt) spec.seed = seed;
    try {
        for (const auto& s : sweeps) spec.sweeps.push_back(dfrc::parse_sweep(s));
    } catch (const std::exception& e) {
        std::cerr << "dfrc: invalid sweep: " << e.what() << '\n';
        return dfrc::kExitInvalidConfig;
    }
    return dfrc::run_experiment(spec, std::cerr);
}
