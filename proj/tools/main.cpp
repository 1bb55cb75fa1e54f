#include <cstdio>
#include <iostream>
#include <stdexcept>

#include "commands.hpp"
#include "json.hpp"

namespace {

void error_json(const char* kind, const std::string& message) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drainage trees of coalescing walks and their continuum skeletons"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value file; command-line flags take precedence");

    drainage::cli::Common common;
    app.add_option("--seed", common.seed, "master seed")->capture_default_str();
    app.add_option("--workers", common.workers, "worker threads (0: DRAINAGE_WORKERS or all cores)");
    app.add_flag("--dry-run", common.dry_run, "print the resolved parameters and exit");

    std::function<void()> action;
    drainage::cli::register_commands(app, common, action);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (action) action();
    } catch (const std::invalid_argument& e) {
        error_json("usage", e.what());
        return 1;
    } catch (const std::out_of_range& e) {
        error_json("usage", e.what());
        return 1;
    } catch (const std::exception& e) {
        error_json("numerical_failure", e.what());
        return 2;
    }
    return 0;
}
