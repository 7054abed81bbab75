// nozzle_limit: steady nozzle solves and gamma -> infinity sweeps.
//
//   nozzle_limit solve --config run.json [--out DIR]
//   nozzle_limit sweep --config sweep.json [--threads N] [--gamma 5,10,20]
//   nozzle_limit check --config check.json
//   nozzle_limit report --out DIR

#include "nozzle/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Steady compressible nozzle flows and their incompressible limit"};
    app.require_subcommand(1);

    std::string config;
    nozzle::Overrides ov;
    std::string out;
    int threads = 0;
    std::vector<double> gammas;

    auto add = [&](const char* name, const char* help, bool needs_config) {
        CLI::App* sub = app.add_subcommand(name, help);
        auto* c = sub->add_option("--config", config, "run configuration (JSON)");
        if (needs_config) c->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides the config)");
        sub->add_option("--threads", threads, "worker threads for independent solves")->check(CLI::PositiveNumber);
        sub->add_option("--gamma", gammas, "comma-separated gamma list (overrides the config)")->delimiter(',');
        return sub;
    };
    add("solve", "solve one configured problem", true);
    add("sweep", "gamma sweep with limit diagnostics", true);
    add("check", "property suites", true);
    add("report", "re-plot and summarise a sweep directory", false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nozzle::exit_code::config;
    }

    if (!out.empty()) ov.out = out;
    if (threads > 0) ov.threads = threads;
    if (!gammas.empty()) ov.gammas = gammas;
    const std::string command = app.get_subcommands().front()->get_name();
    return nozzle::run_command(command, config, ov, std::cout, std::cerr);
}
