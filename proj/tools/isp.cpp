#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "isp/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Half-axis direct and inverse scattering for M-canonical systems"};
    std::string command, config;
    std::string out;
    int threads = 0;
    std::uint64_t seed = 0;

    app.add_option("command", command, "Subcommand")->required()->check(CLI::IsMember(isp::command_names()));
    app.add_option("--config", config, "Run configuration (JSON)")->required();
    app.add_option("--out", out, "Output directory (default: $ISP_OUT_DIR, else ./isp_out)");
    app.add_option("--threads", threads, "Worker thread cap")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? isp::kExitOk : isp::kExitInput;
    }

    isp::RunContext ctx;
    if (!out.empty()) {
        ctx.out_dir = out;
    } else if (const char* env = std::getenv("ISP_OUT_DIR"); env && *env) {
        ctx.out_dir = env;
    } else {
        ctx.out_dir = "isp_out";
    }
    ctx.threads = threads;
    if (*seed_opt) ctx.seed = seed;

    const auto outcome = isp::run_cli(command, config, ctx);
    if (outcome.report.contains("error")) {
        const auto& e = outcome.report["error"];
        std::fprintf(stderr, "isp %s: %s: %s\n", command.c_str(), e["name"].get<std::string>().c_str(),
                     e["message"].get<std::string>().c_str());
    } else {
        std::fprintf(stderr, "isp %s: ok, report in %s\n", command.c_str(), (ctx.out_dir / "report.json").c_str());
    }
    return outcome.exit_code;
}
