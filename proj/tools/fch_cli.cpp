#include "fch/config.hpp"
#include "fch/errors.hpp"
#include "fch/runner.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

int main(int argc, char** argv)
{
    if (const char* env = std::getenv("FCH_NUM_THREADS")) {
        try {
            Eigen::setNbThreads(std::max(1, std::stoi(env)));
        } catch (const std::exception&) {
            std::cerr << "error: FCH_NUM_THREADS must be an integer\n";
            return 2;
        }
    }

    CLI::App app{"Fractional Cahn-Hilliard solver on an interval"};
    app.require_subcommand(1, 1);
    std::string config_path;
    std::string out_dir;
    for (const char* name : {"simulate", "equilibrium", "verify", "spectrum", "rates"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        fch::RunConfig cfg = fch::parse_config(config_path);
        if (!out_dir.empty()) {
            cfg.output.dir = out_dir;
        }
        return fch::run_command(app.get_subcommands().front()->get_name(), cfg);
    } catch (const fch::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
