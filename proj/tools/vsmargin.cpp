// vsmargin: cost-sensitive max-margin experiment harness.
//
// Usage: vsmargin <subcommand> --config path.json [--out dir]
// Subcommands: gen, train, svm, theory, tune, sweep, phase, deo-zero.
// VSMARGIN_THREADS caps the worker pool for grid sweeps.

#include "vsmargin/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"cost-sensitive max-margin classifiers and their sharp "
                 "high-dimensional theory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    const std::vector<std::string> subs = {"gen",  "train", "svm",   "theory",
                                           "tune", "sweep", "phase", "deo-zero"};
    for (const auto& name : subs) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        std::ifstream in(config_path);
        nlohmann::json config = nlohmann::json::parse(in);
        return vsmargin::cli::dispatch(sub, config, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "vsmargin " << sub << ": " << e.what() << "\n";
        return 1;
    }
}
