#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "homlab/commands.hpp"
#include "homlab/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"homlab: homoclinic-orbit laboratory"};
    app.require_subcommand(1, 1);
    std::string config_path, out_dir;
    int workers = 1;
    for (const auto& name : homlab::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "key = value configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (default: $HOMLAB_OUT or .)");
        sub->add_option("--workers", workers, "worker threads for independent suite items")
            ->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : homlab::ExitConfigError;
    }
    homlab::RunContext ctx;
    if (out_dir.empty()) {
        const char* env = std::getenv("HOMLAB_OUT");
        out_dir = env ? env : ".";
    }
    ctx.out_dir = out_dir;
    ctx.workers = workers;
    ctx.log = &std::cout;
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return homlab::run_command(command, homlab::Config::load(config_path), ctx);
    } catch (const homlab::Error& e) {
        std::cout << "config error: " << e.what() << "\n";
        return homlab::ExitConfigError;
    }
}
