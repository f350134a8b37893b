#include "lab/experiments.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"lab: reproducible spectral and observability experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    run->add_option("config", config, "config file")->required();
    auto* out_opt = run->add_option("--out", out, "output root (overrides 'out')");
    auto* seed_opt = run->add_option("--seed", seed, "RNG seed (overrides 'seed')");

    auto* list = app.add_subcommand("list", "list experiments");
    bool as_json = false;
    list->add_flag("--json", as_json, "machine-readable catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (list->parsed()) {
        if (as_json)
            std::cout << lab::catalog_json().dump(2) << "\n";
        else
            std::cout << lab::catalog_text();
        return 0;
    }

    lab::RunOptions opt;
    if (*out_opt)
        opt.out = out;
    if (*seed_opt)
        opt.seed = seed;
    lab::RunResult r = lab::run_config_file(config, opt);
    (r.exit_code == 1 ? std::cerr : std::cout) << r.message << "\n";
    return r.exit_code;
}
