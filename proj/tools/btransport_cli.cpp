#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "btransport/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Brownian transport solver and Cantelli counter-example builder"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"solve", "lattice transport between two CSV measures (mu0=, mu1=)"},
        {"pipeline", "build f, phi and the Cantor set; writes f.csv, phi.csv, cantor.csv, meta"},
        {"verify", "run the acceptance criteria and print a pass/fail table"},
        {"cantor", "emit the Cantor intervals and gap constants"},
        {"convergence", "mesh-doubling study"},
    };
    std::vector<std::string> tokens;
    std::string config_file;
    int verbosity = 0;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("params", tokens, "key=value parameters");
        sub->add_option("--config", config_file, "file with one key=value per line")->check(CLI::ExistingFile);
        sub->add_flag("-v,--verbose", verbosity, "more output (repeatable)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return btransport::cli::kBadInput;
    }

    try {
        const auto cfg = btransport::cli::make_config(app.get_subcommands().front()->get_name(), tokens, config_file, verbosity);
        return btransport::cli::run(cfg);
    } catch (const btransport::PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return btransport::cli::kBadInput;
    }
}
